#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "../src/cli/commands.hpp"
#include "alpr/errors.hpp"

namespace {

// Pipeline flags shared by subcommands. Precedence: flag > environment >
// --config file > built-in default.
struct ConfigFlags {
    std::string config_path;
    alpr::PipelineConfig bound; // receives flag/env values
    bool no_heuristics = false;

    CLI::Option* o_config = nullptr;
    CLI::Option* o_det_iou = nullptr;
    CLI::Option* o_char_conf = nullptr;
    CLI::Option* o_char_iou = nullptr;
    CLI::Option* o_min_plate = nullptr;
    CLI::Option* o_batch_sizes = nullptr;
    CLI::Option* o_no_heuristics = nullptr;
    CLI::Option* o_jobs = nullptr;

    void attach(CLI::App& cmd) {
        o_config = cmd.add_option("--config", config_path,
                                  "JSON config file (flags override it)")
                       ->envname("ALPR_CONFIG");
        o_det_iou = cmd.add_option("--det-iou", bound.det_iou,
                                   "plate detection NMS IoU threshold")
                        ->envname("ALPR_DET_IOU");
        o_char_conf = cmd.add_option("--char-conf", bound.char_conf,
                                     "character confidence threshold")
                          ->envname("ALPR_CHAR_CONF");
        o_char_iou = cmd.add_option("--char-iou", bound.char_iou,
                                    "character NMS IoU threshold")
                         ->envname("ALPR_CHAR_IOU");
        o_min_plate = cmd.add_option("--min-plate-px", bound.min_plate_px,
                                     "minimum plate side in pixels")
                          ->envname("ALPR_MIN_PLATE_PX");
        o_batch_sizes = cmd.add_option("--batch-sizes", bound.batch_sizes,
                                       "comma-separated batch sizes")
                            ->delimiter(',')
                            ->envname("ALPR_BATCH_SIZES");
        o_no_heuristics =
            cmd.add_flag("--no-heuristics", no_heuristics,
                         "skip format heuristics, keep raw strings")
                ->envname("ALPR_NO_HEURISTICS");
        o_jobs = cmd.add_option("--jobs", bound.jobs,
                                "worker threads per batch")
                     ->envname("ALPR_JOBS");
    }

    alpr::PipelineConfig resolve(std::string* config_out) const {
        alpr::PipelineConfig cfg;
        if (o_config->count() > 0) {
            std::ifstream in(config_path);
            if (!in) {
                throw alpr::ParseError(config_path + ": cannot open file");
            }
            alpr::json j;
            try {
                j = alpr::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw alpr::ParseError(config_path + ": " + e.what());
            }
            cfg = alpr::PipelineConfig::from_json(j, config_path);
            if (config_out != nullptr && j.contains("out") &&
                j["out"].is_string()) {
                *config_out = j["out"].get<std::string>();
            }
        }
        if (o_det_iou->count() > 0) cfg.det_iou = bound.det_iou;
        if (o_char_conf->count() > 0) cfg.char_conf = bound.char_conf;
        if (o_char_iou->count() > 0) cfg.char_iou = bound.char_iou;
        if (o_min_plate->count() > 0) cfg.min_plate_px = bound.min_plate_px;
        if (o_batch_sizes->count() > 0) cfg.batch_sizes = bound.batch_sizes;
        if (o_no_heuristics->count() > 0)
            cfg.heuristics_enabled = !no_heuristics;
        if (o_jobs->count() > 0) cfg.jobs = bound.jobs;
        return cfg;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"post-inference license plate pipeline: decode, arrange, "
                 "correct, evaluate, benchmark"};
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    auto* run = app.add_subcommand(
        "run", "process a frame list against detection fixtures");
    alpr::cli::RunOptions run_opts;
    ConfigFlags run_cfg;
    run->add_option("frames", run_opts.frames_path,
                    "frame list (annotation document)")
        ->required();
    run->add_option("plate_fixtures", run_opts.plate_fixtures_path,
                    "plate detection fixture document")
        ->required();
    run->add_option("char_fixtures", run_opts.char_fixtures_path,
                    "character fixture document (may equal plate_fixtures)")
        ->required();
    auto* run_out = run->add_option("--out", run_opts.out_path,
                                    "results output path")
                        ->envname("ALPR_OUT");
    run_cfg.attach(*run);

    // eval -----------------------------------------------------------------
    auto* eval = app.add_subcommand(
        "eval", "score a results document against annotations");
    alpr::cli::EvalOptions eval_opts;
    eval->add_option("results", eval_opts.results_path, "results document")
        ->required();
    eval->add_option("annotations", eval_opts.annotations_path,
                     "annotation document")
        ->required();
    eval->add_option("--det-iou", eval_opts.det_iou,
                     "detection matching IoU threshold")
        ->envname("ALPR_DET_IOU");
    eval->add_option("--out", eval_opts.out_path, "report output path")
        ->envname("ALPR_OUT");

    // bench ----------------------------------------------------------------
    auto* bench = app.add_subcommand(
        "bench", "time the pipeline on a synthetic corpus");
    alpr::cli::BenchOptions bench_opts;
    ConfigFlags bench_cfg;
    bench->add_option("--frames", bench_opts.frames, "synthetic frame count");
    bench->add_option("--max-plates", bench_opts.max_plates,
                      "max plates per frame");
    bench->add_option("--seed", bench_opts.seed, "corpus RNG seed");
    bench->add_option("--max-confusions", bench_opts.max_confusions,
                      "max injected confusions per plate");
    bench->add_option("--tensor-rate", bench_opts.tensor_rate,
                      "fraction of crops served as grid tensors");
    bench->add_option("--duplicate-rate", bench_opts.duplicate_rate,
                      "fraction of plates with duplicate detections");
    bench->add_option("--sub-min-rate", bench_opts.sub_min_rate,
                      "fraction of plates below the size filter");
    auto* bench_out = bench->add_option("--out", bench_opts.out_path,
                                        "timing document output path")
                          ->envname("ALPR_OUT");
    bench_cfg.attach(*bench);

    // decode-grid ----------------------------------------------------------
    auto* decode = app.add_subcommand(
        "decode-grid", "decode a grid tensor fixture and print detections");
    alpr::cli::DecodeGridOptions decode_opts;
    decode->add_option("tensor", decode_opts.tensor_path,
                       "grid tensor document")
        ->required();
    decode->add_option("--char-conf", decode_opts.char_conf,
                       "confidence threshold")
        ->envname("ALPR_CHAR_CONF");
    decode->add_option("--char-iou", decode_opts.char_iou,
                       "NMS IoU threshold")
        ->envname("ALPR_CHAR_IOU");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::string config_out;
            run_opts.config = run_cfg.resolve(&config_out);
            if (run_out->count() == 0 && !config_out.empty()) {
                run_opts.out_path = config_out;
            }
            return alpr::cli::cmd_run(run_opts, std::cout, std::cerr);
        }
        if (eval->parsed()) {
            return alpr::cli::cmd_eval(eval_opts, std::cout, std::cerr);
        }
        if (bench->parsed()) {
            std::string config_out;
            bench_opts.config = bench_cfg.resolve(&config_out);
            if (bench_out->count() == 0 && !config_out.empty()) {
                bench_opts.out_path = config_out;
            }
            return alpr::cli::cmd_bench(bench_opts, std::cout, std::cerr);
        }
        if (decode->parsed()) {
            return alpr::cli::cmd_decode_grid(decode_opts, std::cout,
                                              std::cerr);
        }
    } catch (const alpr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
