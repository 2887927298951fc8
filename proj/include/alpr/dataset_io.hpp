#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alpr/format_rules.hpp"
#include "alpr/geometry.hpp"
#include "alpr/grid_decode.hpp"

namespace alpr {

// Documents are JSON with explicit schema version fields, written with a
// fixed field order so diffs stay readable. Unknown fields found on load
// are preserved in the record's `extras` and re-emitted on write.
using json = nlohmann::ordered_json;

inline constexpr const char* kAnnotationSchema = "alpr.annotations/1";
inline constexpr const char* kFixtureSchema = "alpr.fixtures/1";
inline constexpr const char* kResultsSchema = "alpr.results/1";
inline constexpr const char* kGridTensorSchema = "alpr.grid_tensor/1";
inline constexpr const char* kEvalReportSchema = "alpr.eval_report/1";

// ---------------------------------------------------------------------------
// Annotations

struct PlateAnnotation {
    BBox bbox;
    int lines = 1; // 1 or 2
    bool recognizable = false;
    std::optional<std::string> plate_string{}; // required iff recognizable
    json extras = json::object();
};

struct FrameAnnotation {
    std::int64_t frame_id = 0;
    std::string timestamp;
    std::string split; // opaque tag ("train"/"test"); no training happens here
    double width = 1920.0;
    double height = 720.0;
    std::string source_uri;
    std::vector<PlateAnnotation> plates;
    json extras = json::object();
};

struct AnnotationDoc {
    std::vector<FrameAnnotation> frames;
    json extras = json::object();

    const FrameAnnotation* find_frame(std::int64_t frame_id) const;
};

// ---------------------------------------------------------------------------
// Detection fixtures (stand-ins for the two networks' outputs)

struct PlateDetectionFixture {
    std::string crop_id;
    BBox bbox; // frame coordinates, carries detector score and class
    json extras = json::object();
};

struct FramePlateFixtures {
    std::int64_t frame_id = 0;
    std::vector<PlateDetectionFixture> detections;
    json extras = json::object();
};

/// Coordinate space of pre-decoded character boxes.
enum class CharCoordSpace {
    Crop,  // relative to the plate crop origin
    Frame, // full-frame coordinates; the pipeline translates them
};

struct CharListFixture {
    std::string crop_id;
    CharCoordSpace coords = CharCoordSpace::Crop;
    std::vector<CharDetection> chars;
    json extras = json::object();
};

struct CharTensorFixture {
    std::string crop_id;
    GridTensor tensor;
    json extras = json::object();
};

struct FixtureDoc {
    std::vector<FramePlateFixtures> plate_detections;
    std::vector<CharListFixture> char_lists;
    std::vector<CharTensorFixture> char_tensors;
    json extras = json::object();

    const FramePlateFixtures* find_plates(std::int64_t frame_id) const;
    const CharListFixture* find_char_list(const std::string& crop_id) const;
    const CharTensorFixture* find_char_tensor(const std::string& crop_id) const;
};

// ---------------------------------------------------------------------------
// Results

struct ReadingRecord {
    std::string crop_id;
    BBox bbox; // plate detection in frame coordinates
    std::string category{}; // "single" or "double"
    std::string raw_string{};
    std::string final_string{};
    bool valid = false;
    std::vector<CharChange> changes{};
    json extras = json::object();
};

struct RejectedRecord {
    std::string crop_id;
    BBox bbox;
    json extras = json::object();
};

struct PlateErrorRecord {
    std::string crop_id;
    BBox bbox;
    std::string message;
    json extras = json::object();
};

struct FrameResultRecord {
    std::int64_t frame_id = 0;
    std::vector<ReadingRecord> readings;
    std::vector<RejectedRecord> rejected;
    std::vector<PlateErrorRecord> errors;
    json extras = json::object();
};

struct ResultsDoc {
    json config = json::object(); // effective config echoed by the producer
    std::vector<FrameResultRecord> frames;
    json timing = json::object();
    json extras = json::object();
};

// ---------------------------------------------------------------------------
// Load / save. Loaders throw ParseError with path and field context;
// `warnings`, when given, collects notes about preserved unknown fields.

AnnotationDoc load_annotations(const std::string& path,
                               std::vector<std::string>* warnings = nullptr);
void save_annotations(const AnnotationDoc& doc, const std::string& path);
json annotations_to_json(const AnnotationDoc& doc);
AnnotationDoc annotations_from_json(const json& j, const std::string& context,
                                    std::vector<std::string>* warnings = nullptr);

FixtureDoc load_fixtures(const std::string& path,
                         std::vector<std::string>* warnings = nullptr);
void save_fixtures(const FixtureDoc& doc, const std::string& path);
json fixtures_to_json(const FixtureDoc& doc);
FixtureDoc fixtures_from_json(const json& j, const std::string& context,
                              std::vector<std::string>* warnings = nullptr);

ResultsDoc load_results(const std::string& path,
                        std::vector<std::string>* warnings = nullptr);
void save_results(const ResultsDoc& doc, const std::string& path);
json results_to_json(const ResultsDoc& doc);
ResultsDoc results_from_json(const json& j, const std::string& context,
                             std::vector<std::string>* warnings = nullptr);

/// Write any document to disk the way the typed savers do (two-space
/// indent, trailing newline). Throws IoError on failure.
void save_json(const json& j, const std::string& path);

/// Standalone grid tensor fixture: dimensions, layout declaration, and the
/// flat value list. Used by the decode-grid workflow and embedded verbatim
/// inside fixture documents.
GridTensor load_grid_tensor(const std::string& path);
void save_grid_tensor(const GridTensor& tensor, const std::string& path);
json grid_tensor_to_json(const GridTensor& tensor);
GridTensor grid_tensor_from_json(const json& j, const std::string& context);

// ---------------------------------------------------------------------------
// Dataset summary (plate counts by lines x recognizability, frame counts
// by split tag)

struct DatasetSummary {
    std::size_t single_recognizable = 0;
    std::size_t single_unrecognizable = 0;
    std::size_t double_recognizable = 0;
    std::size_t double_unrecognizable = 0;
    std::map<std::string, std::size_t> frames_by_split;
    std::size_t total_frames = 0;

    std::size_t total_recognizable() const {
        return single_recognizable + double_recognizable;
    }
    std::size_t total_unrecognizable() const {
        return single_unrecognizable + double_unrecognizable;
    }
    std::size_t total_single() const {
        return single_recognizable + single_unrecognizable;
    }
    std::size_t total_double() const {
        return double_recognizable + double_unrecognizable;
    }
    std::size_t total_plates() const {
        return total_recognizable() + total_unrecognizable();
    }
};

DatasetSummary summarize(const AnnotationDoc& doc);
std::string render_summary(const DatasetSummary& summary);

} // namespace alpr
