#include "alpr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_ratio(double value, const char* name) {
    if (!(value > 0.0 && value <= 1.0)) {
        std::ostringstream msg;
        msg << name << " must be in (0, 1], got " << value;
        throw ContractViolation(msg.str());
    }
}

} // namespace

void PipelineConfig::validate() const {
    check_ratio(det_iou, "det_iou");
    check_ratio(char_conf, "char_conf");
    check_ratio(char_iou, "char_iou");
    if (!(min_plate_px >= 1.0)) {
        std::ostringstream msg;
        msg << "min_plate_px must be >= 1, got " << min_plate_px;
        throw ContractViolation(msg.str());
    }
    if (batch_sizes.empty()) {
        throw ContractViolation("batch_sizes must not be empty");
    }
    for (std::size_t i = 0; i < batch_sizes.size(); ++i) {
        if (batch_sizes[i] < 1) {
            throw ContractViolation("batch sizes must be >= 1");
        }
        if (i > 0 && batch_sizes[i] <= batch_sizes[i - 1]) {
            throw ContractViolation("batch sizes must be strictly increasing");
        }
    }
    if (jobs < 1) {
        throw ContractViolation("jobs must be >= 1");
    }
}

json PipelineConfig::to_json() const {
    return json{{"det_iou", det_iou},
                {"char_conf", char_conf},
                {"char_iou", char_iou},
                {"min_plate_px", min_plate_px},
                {"batch_sizes", batch_sizes},
                {"heuristics", heuristics_enabled},
                {"jobs", jobs}};
}

PipelineConfig PipelineConfig::from_json(const json& j,
                                         const std::string& context) {
    if (!j.is_object()) {
        throw ParseError(context + ": config must be a JSON object");
    }
    PipelineConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "det_iou") {
                cfg.det_iou = value.get<double>();
            } else if (key == "char_conf") {
                cfg.char_conf = value.get<double>();
            } else if (key == "char_iou") {
                cfg.char_iou = value.get<double>();
            } else if (key == "min_plate_px") {
                cfg.min_plate_px = value.get<double>();
            } else if (key == "batch_sizes") {
                cfg.batch_sizes = value.get<std::vector<int>>();
            } else if (key == "heuristics") {
                cfg.heuristics_enabled = value.get<bool>();
            } else if (key == "jobs") {
                cfg.jobs = value.get<int>();
            } else if (key == "out") {
                // config-file equivalent of --out; consumed by the CLI
            } else {
                throw ParseError(context + ": unknown config key '" + key +
                                 "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(context + ": bad value for '" + key +
                             "': " + e.what());
        }
    }
    return cfg;
}

Frame Frame::from_annotation(const FrameAnnotation& a) {
    return Frame{a.frame_id, a.width, a.height, a.source_uri};
}

PlateCrop PlateCrop::from_detection(std::string crop_id, std::int64_t frame_id,
                                    const BBox& bbox, double min_plate_px) {
    const bool recognizable =
        bbox.width() >= min_plate_px && bbox.height() >= min_plate_px;
    return PlateCrop{std::move(crop_id), frame_id, bbox, recognizable};
}

// ---------------------------------------------------------------------------
// Fixture source

FixtureSource::FixtureSource(const FixtureDoc& doc) : doc_(&doc) {
    for (const FramePlateFixtures& f : doc.plate_detections) {
        plates_.emplace(f.frame_id, &f);
    }
    for (const CharListFixture& c : doc.char_lists) {
        char_lists_.emplace(c.crop_id, &c);
    }
    for (const CharTensorFixture& c : doc.char_tensors) {
        char_tensors_.emplace(c.crop_id, &c);
    }
}

std::vector<PlateDetection> FixtureSource::detections(
    std::int64_t frame_id) const {
    const auto it = plates_.find(frame_id);
    if (it == plates_.end()) return {};
    std::vector<PlateDetection> out;
    out.reserve(it->second->detections.size());
    for (const PlateDetectionFixture& det : it->second->detections) {
        out.push_back(PlateDetection{det.crop_id, det.bbox});
    }
    return out;
}

std::optional<CharObservation> FixtureSource::observation(
    const std::string& crop_id) const {
    if (const auto it = char_lists_.find(crop_id); it != char_lists_.end()) {
        return CharObservation{it->second->coords, it->second->chars};
    }
    if (const auto it = char_tensors_.find(crop_id); it != char_tensors_.end()) {
        return CharObservation{CharCoordSpace::Crop, it->second->tensor};
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Operations

std::pair<std::vector<PlateCrop>, std::vector<PlateCrop>> filter_plates(
    const std::vector<PlateDetection>& dets, std::int64_t frame_id,
    double min_plate_px) {
    std::pair<std::vector<PlateCrop>, std::vector<PlateCrop>> split;
    for (const PlateDetection& det : dets) {
        PlateCrop crop = PlateCrop::from_detection(det.crop_id, frame_id,
                                                   det.bbox, min_plate_px);
        (crop.recognizable ? split.first : split.second)
            .push_back(std::move(crop));
    }
    return split;
}

namespace {

// Detection NMS with crop-id association preserved: per-class suppression,
// then one list sorted by descending score.
std::vector<PlateDetection> suppress_detections(
    const std::vector<PlateDetection>& dets, double iou_threshold) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        by_class[dets[i].bbox.class_id()].push_back(i);
    }
    std::vector<std::size_t> kept;
    for (const auto& [class_id, indices] : by_class) {
        std::vector<BBox> boxes;
        boxes.reserve(indices.size());
        for (std::size_t i : indices) boxes.push_back(dets[i].bbox);
        for (std::size_t local : nms_indices(boxes, iou_threshold)) {
            kept.push_back(indices[local]);
        }
    }
    std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
        const BBox& ba = dets[a].bbox;
        const BBox& bb = dets[b].bbox;
        if (ba.score() != bb.score()) return ba.score() > bb.score();
        if (ba.x1() != bb.x1()) return ba.x1() < bb.x1();
        if (ba.y1() != bb.y1()) return ba.y1() < bb.y1();
        return a < b;
    });
    std::vector<PlateDetection> out;
    out.reserve(kept.size());
    for (std::size_t i : kept) out.push_back(dets[i]);
    return out;
}

// Bring an observation's character boxes into crop coordinates.
std::vector<CharDetection> chars_in_crop_space(const CharObservation& obs,
                                               const PlateCrop& crop,
                                               const PipelineConfig& cfg,
                                               double* decode_seconds) {
    if (std::holds_alternative<GridTensor>(obs.payload)) {
        const auto start = Clock::now();
        std::vector<CharDetection> decoded = decode_grid(
            std::get<GridTensor>(obs.payload), cfg.char_conf, cfg.char_iou);
        // Decoded boxes live in the 288x200 network space; scale them into
        // the crop so line rules see real crop geometry.
        const double sx = crop.w() / kCropInputWidth;
        const double sy = crop.h() / kCropInputHeight;
        std::vector<CharDetection> scaled;
        scaled.reserve(decoded.size());
        for (const CharDetection& det : decoded) {
            scaled.push_back(CharDetection{
                BBox(det.bbox.x1() * sx, det.bbox.y1() * sy, det.bbox.x2() * sx,
                     det.bbox.y2() * sy, det.confidence(), det.class_id())});
        }
        *decode_seconds += seconds_since(start);
        return scaled;
    }

    const auto& chars = std::get<std::vector<CharDetection>>(obs.payload);
    if (obs.space == CharCoordSpace::Crop) {
        return chars;
    }
    std::vector<CharDetection> translated;
    translated.reserve(chars.size());
    for (const CharDetection& det : chars) {
        translated.push_back(CharDetection{
            det.bbox.translated(-crop.bbox.x1(), -crop.bbox.y1())});
    }
    return translated;
}

FrameResult process_frame_timed(const Frame& frame,
                                const PlateSource& plate_src,
                                const CharSource& char_src,
                                const PipelineConfig& cfg,
                                StageTimings& timings) {
    FrameResult result;
    result.frame_id = frame.frame_id;

    auto start = Clock::now();
    const std::vector<PlateDetection> raw = plate_src.detections(frame.frame_id);
    timings.ingest += seconds_since(start);

    start = Clock::now();
    const std::vector<PlateDetection> kept =
        suppress_detections(raw, cfg.det_iou);
    timings.nms += seconds_since(start);

    start = Clock::now();
    auto [recognizable, rejected] =
        filter_plates(kept, frame.frame_id, cfg.min_plate_px);
    result.rejected = std::move(rejected);
    timings.filter += seconds_since(start);

    for (const PlateCrop& crop : recognizable) {
        try {
            start = Clock::now();
            const std::optional<CharObservation> obs =
                char_src.observation(crop.crop_id);
            if (!obs) {
                timings.decode += seconds_since(start);
                result.errors.push_back(PlateError{
                    crop, "no character data for crop \"" + crop.crop_id +
                              "\""});
                continue;
            }
            double decode_seconds = 0.0;
            std::vector<CharDetection> chars =
                chars_in_crop_space(*obs, crop, cfg, &decode_seconds);
            timings.decode += decode_seconds;

            start = Clock::now();
            ArrangedPlate arranged = arrange(chars, crop.w());
            timings.arrange += seconds_since(start);

            start = Clock::now();
            CorrectionResult correction =
                correct(arranged.raw_string, cfg.heuristics_enabled);
            timings.correct += seconds_since(start);

            PlateReading reading{crop, std::move(arranged), {},
                                 correction.corrected, correction.valid};
            reading.correction = std::move(correction);
            result.readings.push_back(std::move(reading));
        } catch (const Error& e) {
            result.errors.push_back(PlateError{crop, e.what()});
        }
    }
    return result;
}

} // namespace

FrameResult process_frame(const Frame& frame, const PlateSource& plate_src,
                          const CharSource& char_src,
                          const PipelineConfig& cfg) {
    cfg.validate();
    StageTimings timings;
    return process_frame_timed(frame, plate_src, char_src, cfg, timings);
}

void StageTimings::add(const StageTimings& other) {
    ingest += other.ingest;
    nms += other.nms;
    filter += other.filter;
    decode += other.decode;
    arrange += other.arrange;
    correct += other.correct;
}

json StageTimings::to_json() const {
    return json{{"ingest", ingest},   {"nms", nms},
                {"filter", filter},   {"decode", decode},
                {"arrange", arrange}, {"correct", correct}};
}

namespace {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double rank = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

} // namespace

double BatchTimings::fps() const {
    if (frames == 0 || wall_seconds <= 0.0) return 0.0;
    return static_cast<double>(frames) / wall_seconds;
}

double BatchTimings::latency_median() const {
    return percentile(frame_seconds, 0.5);
}

double BatchTimings::latency_p99() const {
    return percentile(frame_seconds, 0.99);
}

json BatchTimings::to_json() const {
    return json{{"frames", frames},
                {"batch_size", batch_size},
                {"jobs", jobs},
                {"wall_seconds", wall_seconds},
                {"fps", fps()},
                {"stage_seconds", stages.to_json()},
                {"latency_ms",
                 json{{"median", latency_median() * 1e3},
                      {"p99", latency_p99() * 1e3}}}};
}

std::pair<std::vector<FrameResult>, BatchTimings> process_batch(
    const std::vector<Frame>& frames, const PlateSource& plate_src,
    const CharSource& char_src, const PipelineConfig& cfg, int batch_size) {
    cfg.validate();
    if (batch_size < 1) {
        throw ContractViolation("batch_size must be >= 1");
    }

    BatchTimings timings;
    timings.frames = frames.size();
    timings.batch_size = batch_size;
    timings.jobs = cfg.jobs;
    timings.frame_seconds.resize(frames.size(), 0.0);

    std::vector<FrameResult> results(frames.size());
    const auto wall_start = Clock::now();

    std::mutex merge_mutex;
    for (std::size_t chunk = 0; chunk < frames.size();
         chunk += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(frames.size(), chunk + static_cast<std::size_t>(batch_size));
        const int workers = std::max(
            1, std::min(cfg.jobs, static_cast<int>(end - chunk)));

        std::atomic<std::size_t> next{chunk};
        std::exception_ptr failure;

        const auto worker = [&]() {
            StageTimings local;
            try {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= end) break;
                    const auto frame_start = Clock::now();
                    results[i] = process_frame_timed(frames[i], plate_src,
                                                     char_src, cfg, local);
                    timings.frame_seconds[i] = seconds_since(frame_start);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(merge_mutex);
                if (!failure) failure = std::current_exception();
            }
            const std::lock_guard<std::mutex> lock(merge_mutex);
            timings.stages.add(local);
        };

        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> threads;
            threads.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
            for (std::thread& t : threads) t.join();
        }
        if (failure) std::rethrow_exception(failure);
    }

    timings.wall_seconds = seconds_since(wall_start);
    return {std::move(results), timings};
}

ResultsDoc results_to_doc(const std::vector<FrameResult>& results,
                          const PipelineConfig& cfg, const json& timing) {
    ResultsDoc doc;
    doc.config = cfg.to_json();
    doc.timing = timing;
    for (const FrameResult& frame : results) {
        FrameResultRecord record;
        record.frame_id = frame.frame_id;
        for (const PlateReading& reading : frame.readings) {
            ReadingRecord rec{reading.crop.crop_id, reading.crop.bbox};
            rec.category =
                reading.arranged.category == LineCategory::SingleLine
                    ? "single"
                    : "double";
            rec.raw_string = reading.arranged.raw_string;
            rec.final_string = reading.final_string;
            rec.valid = reading.valid;
            rec.changes = reading.correction.changes;
            record.readings.push_back(std::move(rec));
        }
        for (const PlateCrop& crop : frame.rejected) {
            record.rejected.push_back(RejectedRecord{crop.crop_id, crop.bbox});
        }
        for (const PlateError& error : frame.errors) {
            record.errors.push_back(PlateErrorRecord{
                error.crop.crop_id, error.crop.bbox, error.message});
        }
        doc.frames.push_back(std::move(record));
    }
    return doc;
}

} // namespace alpr
