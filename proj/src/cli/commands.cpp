#include "commands.hpp"

#include <iomanip>
#include <ostream>

#include "alpr/errors.hpp"
#include "alpr/evaluation.hpp"
#include "alpr/synthetic.hpp"

namespace alpr::cli {

namespace {

void print_warnings(const std::vector<std::string>& warnings,
                    std::ostream& err) {
    for (const std::string& w : warnings) {
        err << "warning: " << w << "\n";
    }
}

} // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        opts.config.validate();
        std::vector<std::string> warnings;
        const AnnotationDoc frames_doc =
            load_annotations(opts.frames_path, &warnings);
        const FixtureDoc plate_fixtures =
            load_fixtures(opts.plate_fixtures_path, &warnings);
        const FixtureDoc char_fixtures =
            opts.char_fixtures_path == opts.plate_fixtures_path
                ? FixtureDoc{}
                : load_fixtures(opts.char_fixtures_path, &warnings);
        print_warnings(warnings, err);

        const FixtureSource plate_src(plate_fixtures);
        const FixtureSource char_src_own(char_fixtures);
        const FixtureSource& char_src =
            opts.char_fixtures_path == opts.plate_fixtures_path ? plate_src
                                                                : char_src_own;

        std::vector<Frame> frames;
        frames.reserve(frames_doc.frames.size());
        for (const FrameAnnotation& f : frames_doc.frames) {
            frames.push_back(Frame::from_annotation(f));
        }

        const int batch = static_cast<int>(std::max<std::size_t>(1, frames.size()));
        auto [results, timings] =
            process_batch(frames, plate_src, char_src, opts.config, batch);

        const ResultsDoc doc =
            results_to_doc(results, opts.config, timings.to_json());
        save_results(doc, opts.out_path);

        std::size_t readings = 0, rejected = 0, errors = 0, invalid = 0;
        for (const FrameResult& r : results) {
            readings += r.readings.size();
            rejected += r.rejected.size();
            errors += r.errors.size();
            for (const PlateReading& reading : r.readings) {
                if (!reading.valid) ++invalid;
            }
        }
        out << "frames=" << results.size() << " plates_read=" << readings
            << " plates_rejected=" << rejected << " invalid_strings=" << invalid
            << " plate_errors=" << errors << " -> " << opts.out_path << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        if (!(opts.det_iou > 0.0 && opts.det_iou <= 1.0)) {
            throw ContractViolation("det_iou must be in (0, 1]");
        }
        std::vector<std::string> warnings;
        const ResultsDoc results = load_results(opts.results_path, &warnings);
        const AnnotationDoc annotations =
            load_annotations(opts.annotations_path, &warnings);
        print_warnings(warnings, err);

        const EvalReport report = evaluate(results, annotations, opts.det_iou);
        out << render_report(report);

        json doc;
        doc["schema"] = kEvalReportSchema;
        doc["config"] = json{{"det_iou", opts.det_iou}};
        json body = report.to_json();
        for (auto& [key, value] : body.items()) {
            doc[key] = std::move(value);
        }
        save_json(doc, opts.out_path);
        out << "report -> " << opts.out_path << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        opts.config.validate();

        SyntheticOptions gen;
        gen.frames = opts.frames;
        gen.max_plates_per_frame = opts.max_plates;
        gen.seed = opts.seed;
        gen.max_confusions = opts.max_confusions;
        gen.tensor_rate = opts.tensor_rate;
        gen.duplicate_rate = opts.duplicate_rate;
        gen.sub_min_rate = opts.sub_min_rate;
        gen.min_plate_px = opts.config.min_plate_px;
        const SyntheticCorpus corpus = make_corpus(gen);

        const FixtureSource source(corpus.fixtures);
        std::vector<Frame> frames;
        frames.reserve(corpus.annotations.frames.size());
        for (const FrameAnnotation& f : corpus.annotations.frames) {
            frames.push_back(Frame::from_annotation(f));
        }

        // Reference pass: smallest batch, single worker. Every other
        // configuration must reproduce its readings bit for bit.
        PipelineConfig ref_cfg = opts.config;
        ref_cfg.jobs = 1;
        const auto ref = process_batch(frames, source, source, ref_cfg,
                                       opts.config.batch_sizes.front());
        const std::string reference =
            results_to_json(results_to_doc(ref.first, opts.config))["frames"]
                .dump();

        std::vector<BatchTimings> runs;
        bool equivalent = true;
        for (int batch : opts.config.batch_sizes) {
            auto [results, timings] =
                process_batch(frames, source, source, opts.config, batch);
            runs.push_back(timings);
            const std::string got =
                results_to_json(results_to_doc(results, opts.config))["frames"]
                    .dump();
            if (got != reference) {
                equivalent = false;
                err << "error: results differ between batch size "
                    << opts.config.batch_sizes.front() << " (jobs 1) and batch size "
                    << batch << " (jobs " << opts.config.jobs << ")\n";
            }
        }

        out << std::left << std::setw(22) << "batch size";
        for (const BatchTimings& t : runs) {
            out << std::right << std::setw(12) << t.batch_size;
        }
        out << "\n" << std::fixed << std::setprecision(1);
        out << std::left << std::setw(22) << "fps";
        for (const BatchTimings& t : runs) {
            out << std::right << std::setw(12) << t.fps();
        }
        out << "\n" << std::setprecision(3);
        out << std::left << std::setw(22) << "wall seconds";
        for (const BatchTimings& t : runs) {
            out << std::right << std::setw(12) << t.wall_seconds;
        }
        out << "\n";
        const auto stage_row = [&](const char* name, auto getter) {
            out << std::left << std::setw(22) << name;
            for (const BatchTimings& t : runs) {
                out << std::right << std::setw(12) << getter(t) * 1e3;
            }
            out << "\n";
        };
        stage_row("ingest ms", [](const BatchTimings& t) { return t.stages.ingest; });
        stage_row("nms ms", [](const BatchTimings& t) { return t.stages.nms; });
        stage_row("filter ms", [](const BatchTimings& t) { return t.stages.filter; });
        stage_row("decode ms", [](const BatchTimings& t) { return t.stages.decode; });
        stage_row("arrange ms", [](const BatchTimings& t) { return t.stages.arrange; });
        stage_row("correct ms", [](const BatchTimings& t) { return t.stages.correct; });
        stage_row("frame median ms",
                  [](const BatchTimings& t) { return t.latency_median(); });
        stage_row("frame p99 ms",
                  [](const BatchTimings& t) { return t.latency_p99(); });
        out << "results identical across batch sizes and jobs: "
            << (equivalent ? "yes" : "NO") << "\n";

        if (!opts.out_path.empty()) {
            json doc;
            doc["schema"] = "alpr.bench/1";
            doc["config"] = opts.config.to_json();
            doc["frames"] = opts.frames;
            doc["equivalent"] = equivalent;
            json arr = json::array();
            for (const BatchTimings& t : runs) arr.push_back(t.to_json());
            doc["runs"] = std::move(arr);
            save_json(doc, opts.out_path);
            out << "timings -> " << opts.out_path << "\n";
        }
        return equivalent ? 0 : 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_decode_grid(const DecodeGridOptions& opts, std::ostream& out,
                    std::ostream& err) {
    try {
        const GridTensor tensor = load_grid_tensor(opts.tensor_path);
        const std::vector<CharDetection> dets =
            decode_grid(tensor, opts.char_conf, opts.char_iou);
        out << dets.size() << " detection(s)\n" << std::fixed;
        for (const CharDetection& det : dets) {
            out << "  '" << det.symbol() << "' class=" << std::setw(2)
                << det.class_id() << " conf=" << std::setprecision(4)
                << det.confidence() << " box=(" << std::setprecision(2)
                << det.bbox.x1() << ", " << det.bbox.y1() << ", "
                << det.bbox.x2() << ", " << det.bbox.y2() << ")\n";
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace alpr::cli
