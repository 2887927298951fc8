#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "alpr/arrangement.hpp"
#include "alpr/dataset_io.hpp"
#include "alpr/format_rules.hpp"
#include "alpr/geometry.hpp"
#include "alpr/grid_decode.hpp"

namespace alpr {

/// Tunables for the full frame -> plates -> characters -> string flow.
/// Defaults follow the deployed thresholds: detection NMS IoU 0.5,
/// character confidence 0.25, character NMS IoU 0.5, 50 px minimum plate
/// side.
struct PipelineConfig {
    double det_iou = 0.5;
    double char_conf = 0.25;
    double char_iou = 0.5;
    double min_plate_px = 50.0;
    std::vector<int> batch_sizes = {1, 2, 4, 8, 16, 32};
    bool heuristics_enabled = true;
    int jobs = 1;

    /// Throws ContractViolation when a field is out of range.
    void validate() const;

    json to_json() const;
    static PipelineConfig from_json(const json& j, const std::string& context);
};

struct Frame {
    std::int64_t frame_id = 0;
    double width = 1920.0;
    double height = 720.0;
    std::string source_uri;

    static Frame from_annotation(const FrameAnnotation& a);
};

/// A plate detection promoted to a crop: its box, side lengths, and
/// whether it is large enough to attempt recognition on.
struct PlateCrop {
    std::string crop_id;
    std::int64_t frame_id = 0;
    BBox bbox;
    bool recognizable = false;

    double w() const { return bbox.width(); }
    double h() const { return bbox.height(); }

    static PlateCrop from_detection(std::string crop_id, std::int64_t frame_id,
                                    const BBox& bbox, double min_plate_px);
};

struct PlateReading {
    PlateCrop crop;
    ArrangedPlate arranged;
    CorrectionResult correction;
    std::string final_string;
    bool valid = false;
};

struct PlateError {
    PlateCrop crop;
    std::string message;
};

struct FrameResult {
    std::int64_t frame_id = 0;
    std::vector<PlateReading> readings;
    std::vector<PlateCrop> rejected;
    std::vector<PlateError> errors;
};

// ---------------------------------------------------------------------------
// Detection sources: the seam where network outputs enter the pipeline.

struct PlateDetection {
    std::string crop_id;
    BBox bbox;
};

/// Pre-decoded character boxes together with the space their coordinates
/// live in, or a raw grid tensor still to be decoded.
struct CharObservation {
    CharCoordSpace space = CharCoordSpace::Crop;
    std::variant<std::vector<CharDetection>, GridTensor> payload;
};

class PlateSource {
public:
    virtual ~PlateSource() = default;
    /// Raw plate detections for a frame; empty when the frame has none.
    virtual std::vector<PlateDetection> detections(std::int64_t frame_id) const = 0;
};

class CharSource {
public:
    virtual ~CharSource() = default;
    /// Character observation for a crop, or nullopt when the source has no
    /// data for it (reported as a per-plate error by the pipeline).
    virtual std::optional<CharObservation> observation(
        const std::string& crop_id) const = 0;
};

/// Fixture-backed source implementing both roles over a FixtureDoc.
/// Builds lookup indexes once; the document must outlive the source.
class FixtureSource : public PlateSource, public CharSource {
public:
    explicit FixtureSource(const FixtureDoc& doc);

    std::vector<PlateDetection> detections(std::int64_t frame_id) const override;
    std::optional<CharObservation> observation(
        const std::string& crop_id) const override;

private:
    const FixtureDoc* doc_;
    std::unordered_map<std::int64_t, const FramePlateFixtures*> plates_;
    std::unordered_map<std::string, const CharListFixture*> char_lists_;
    std::unordered_map<std::string, const CharTensorFixture*> char_tensors_;
};

// ---------------------------------------------------------------------------
// Operations

/// Split detections into crops that are large enough to recognize and
/// crops rejected by the size filter (kept for reporting). A side exactly
/// at the minimum is recognizable.
std::pair<std::vector<PlateCrop>, std::vector<PlateCrop>> filter_plates(
    const std::vector<PlateDetection>& dets, std::int64_t frame_id,
    double min_plate_px);

/// Run one frame through detection NMS, the size filter, character
/// decoding, arrangement, and correction. A failure on one plate is
/// recorded as a per-plate error and never aborts the frame.
FrameResult process_frame(const Frame& frame, const PlateSource& plate_src,
                          const CharSource& char_src,
                          const PipelineConfig& cfg);

/// Wall-clock seconds spent per pipeline stage.
struct StageTimings {
    double ingest = 0.0;
    double nms = 0.0;
    double filter = 0.0;
    double decode = 0.0;
    double arrange = 0.0;
    double correct = 0.0;

    void add(const StageTimings& other);
    json to_json() const;
};

struct BatchTimings {
    std::size_t frames = 0;
    int batch_size = 1;
    int jobs = 1;
    double wall_seconds = 0.0;
    StageTimings stages;
    std::vector<double> frame_seconds; // per-frame latency, frame order

    double fps() const;
    double latency_median() const;
    double latency_p99() const;
    json to_json() const;
};

/// Process frames in chunks of batch_size, optionally fanning each chunk
/// out over `jobs` worker threads. Per-frame results are identical to
/// sequential process_frame calls; only the timings depend on batching.
std::pair<std::vector<FrameResult>, BatchTimings> process_batch(
    const std::vector<Frame>& frames, const PlateSource& plate_src,
    const CharSource& char_src, const PipelineConfig& cfg, int batch_size);

/// Serialize frame results into the results document schema.
ResultsDoc results_to_doc(const std::vector<FrameResult>& results,
                          const PipelineConfig& cfg,
                          const json& timing = json::object());

} // namespace alpr
