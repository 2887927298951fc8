#include "alpr/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

// Internal: a schema problem at a specific field path. Collected per
// record so one bad record does not hide the others.
struct FieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const json& require(const json& j, const char* key, const std::string& at) {
    if (!j.is_object()) {
        throw FieldError(at + ": expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw FieldError(at + ": missing required field '" + key + "'");
    }
    return *it;
}

double as_number(const json& v, const std::string& at) {
    if (!v.is_number()) throw FieldError(at + ": expected a number");
    return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& at) {
    if (!v.is_number_integer()) throw FieldError(at + ": expected an integer");
    return v.get<std::int64_t>();
}

bool as_bool(const json& v, const std::string& at) {
    if (!v.is_boolean()) throw FieldError(at + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& at) {
    if (!v.is_string()) throw FieldError(at + ": expected a string");
    return v.get<std::string>();
}

char as_char(const json& v, const std::string& at) {
    const std::string s = as_string(v, at);
    if (s.size() != 1) throw FieldError(at + ": expected a single character");
    return s[0];
}

const json& as_array(const json& v, const std::string& at) {
    if (!v.is_array()) throw FieldError(at + ": expected an array");
    return v;
}

/// Keys not in `known` are preserved verbatim and reported as warnings.
json collect_extras(const json& j, std::initializer_list<const char*> known,
                    const std::string& at, std::vector<std::string>* warnings) {
    json extras = json::object();
    if (!j.is_object()) return extras;
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                return key == k;
            }) != known.end()) {
            continue;
        }
        extras[key] = value;
        if (warnings) {
            warnings->push_back(at + ": unknown field '" + key +
                                "' preserved");
        }
    }
    return extras;
}

/// Re-emit preserved extras. Known fields win on collision; object-valued
/// extras merge into same-named known objects (nested preservation).
void merge_extras(json& out, const json& extras) {
    for (const auto& [key, value] : extras.items()) {
        if (!out.contains(key)) {
            out[key] = value;
        } else if (out[key].is_object() && value.is_object()) {
            for (const auto& [k2, v2] : value.items()) {
                if (!out[key].contains(k2)) out[key][k2] = v2;
            }
        }
    }
}

json bbox_to_json(const BBox& b, bool with_score) {
    json j = {{"x1", b.x1()}, {"y1", b.y1()}, {"x2", b.x2()}, {"y2", b.y2()}};
    if (with_score) {
        j["score"] = b.score();
        j["class_id"] = b.class_id();
    }
    return j;
}

constexpr std::initializer_list<const char*> kBBoxKeys = {
    "x1", "y1", "x2", "y2", "score", "class_id"};

BBox bbox_from_json(const json& v, const std::string& at) {
    const double x1 = as_number(require(v, "x1", at), at + ".x1");
    const double y1 = as_number(require(v, "y1", at), at + ".y1");
    const double x2 = as_number(require(v, "x2", at), at + ".x2");
    const double y2 = as_number(require(v, "y2", at), at + ".y2");
    const double score =
        v.contains("score") ? as_number(v["score"], at + ".score") : 1.0;
    const int class_id =
        v.contains("class_id")
            ? static_cast<int>(as_int(v["class_id"], at + ".class_id"))
            : 0;
    try {
        return BBox(x1, y1, x2, y2, score, class_id);
    } catch (const ContractViolation& e) {
        throw FieldError(at + ": " + e.what());
    }
}

json read_file_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": parse error at byte " +
                         std::to_string(e.byte) + ": " + e.what());
    }
}

void write_file_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(path + ": cannot open file for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError(path + ": write failed");
    }
}

} // namespace

void save_json(const json& j, const std::string& path) {
    write_file_json(j, path);
}

namespace {

void check_schema(const json& j, const char* expected, const std::string& at) {
    const std::string schema =
        as_string(require(j, "schema", at), at + ".schema");
    if (schema != expected) {
        throw FieldError(at + ".schema: expected \"" + expected +
                         "\", got \"" + schema + "\"");
    }
}

[[noreturn]] void throw_violations(const std::string& context,
                                   const std::vector<std::string>& violations) {
    std::ostringstream msg;
    msg << context << ": " << violations.size() << " schema violation(s):";
    for (const std::string& v : violations) {
        msg << "\n  - " << v;
    }
    throw ParseError(msg.str());
}

std::vector<CharChange> changes_from_json(const json& v, const std::string& at) {
    std::vector<CharChange> changes;
    const json& arr = as_array(v, at);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string cat = at + "[" + std::to_string(i) + "]";
        const json& cj = arr[i];
        CharChange change;
        change.position = static_cast<std::size_t>(
            as_int(require(cj, "pos", cat), cat + ".pos"));
        change.from = as_char(require(cj, "from", cat), cat + ".from");
        change.to = as_char(require(cj, "to", cat), cat + ".to");
        changes.push_back(change);
    }
    return changes;
}

json changes_to_json(const std::vector<CharChange>& changes) {
    json arr = json::array();
    for (const CharChange& c : changes) {
        arr.push_back({{"pos", c.position},
                       {"from", std::string(1, c.from)},
                       {"to", std::string(1, c.to)}});
    }
    return arr;
}

} // namespace

// ---------------------------------------------------------------------------
// Annotations

const FrameAnnotation* AnnotationDoc::find_frame(std::int64_t frame_id) const {
    for (const FrameAnnotation& f : frames) {
        if (f.frame_id == frame_id) return &f;
    }
    return nullptr;
}

AnnotationDoc annotations_from_json(const json& j, const std::string& context,
                                    std::vector<std::string>* warnings) {
    std::vector<std::string> violations;
    AnnotationDoc doc;
    try {
        check_schema(j, kAnnotationSchema, context);
    } catch (const FieldError& e) {
        throw_violations(context, {e.what()});
    }
    doc.extras = collect_extras(j, {"schema", "frames"}, context, warnings);

    const json* frames = nullptr;
    try {
        frames = &as_array(require(j, "frames", context), context + ".frames");
    } catch (const FieldError& e) {
        throw_violations(context, {e.what()});
    }

    std::set<std::int64_t> seen_ids;
    for (std::size_t i = 0; i < frames->size(); ++i) {
        const std::string fat = context + ".frames[" + std::to_string(i) + "]";
        const json& fj = (*frames)[i];
        try {
            FrameAnnotation frame;
            frame.frame_id =
                as_int(require(fj, "frame_id", fat), fat + ".frame_id");
            if (!seen_ids.insert(frame.frame_id).second) {
                throw FieldError(fat + ": duplicate frame_id " +
                                 std::to_string(frame.frame_id));
            }
            if (fj.contains("timestamp"))
                frame.timestamp = as_string(fj["timestamp"], fat + ".timestamp");
            if (fj.contains("split"))
                frame.split = as_string(fj["split"], fat + ".split");
            if (fj.contains("width"))
                frame.width = as_number(fj["width"], fat + ".width");
            if (fj.contains("height"))
                frame.height = as_number(fj["height"], fat + ".height");
            if (fj.contains("source_uri"))
                frame.source_uri =
                    as_string(fj["source_uri"], fat + ".source_uri");
            if (!(frame.width > 0.0) || !(frame.height > 0.0)) {
                throw FieldError(fat + ": frame dimensions must be positive");
            }
            frame.extras = collect_extras(fj,
                                          {"frame_id", "timestamp", "split",
                                           "width", "height", "source_uri",
                                           "plates"},
                                          fat, warnings);

            if (fj.contains("plates")) {
                const json& plates = as_array(fj["plates"], fat + ".plates");
                for (std::size_t p = 0; p < plates.size(); ++p) {
                    const std::string pat =
                        fat + ".plates[" + std::to_string(p) + "]";
                    const json& pj = plates[p];
                    try {
                        const BBox bbox = bbox_from_json(
                            require(pj, "bbox", pat), pat + ".bbox");
                        PlateAnnotation plate{bbox};
                        plate.lines = static_cast<int>(
                            as_int(require(pj, "lines", pat), pat + ".lines"));
                        if (plate.lines != 1 && plate.lines != 2) {
                            throw FieldError(pat +
                                             ".lines: must be 1 or 2, got " +
                                             std::to_string(plate.lines));
                        }
                        plate.recognizable =
                            as_bool(require(pj, "recognizable", pat),
                                    pat + ".recognizable");
                        if (pj.contains("plate_string")) {
                            plate.plate_string = as_string(
                                pj["plate_string"], pat + ".plate_string");
                        }
                        if (plate.recognizable && !plate.plate_string) {
                            throw FieldError(
                                pat +
                                ": recognizable plate missing plate_string");
                        }
                        plate.extras = collect_extras(
                            pj,
                            {"bbox", "lines", "recognizable", "plate_string"},
                            pat, warnings);
                        json bbox_extras = collect_extras(
                            pj["bbox"], kBBoxKeys, pat + ".bbox", warnings);
                        if (!bbox_extras.empty()) {
                            plate.extras["bbox"] = std::move(bbox_extras);
                        }
                        frame.plates.push_back(std::move(plate));
                    } catch (const FieldError& e) {
                        violations.push_back(e.what());
                    }
                }
            }
            doc.frames.push_back(std::move(frame));
        } catch (const FieldError& e) {
            violations.push_back(e.what());
        }
    }
    if (!violations.empty()) {
        throw_violations(context, violations);
    }
    return doc;
}

json annotations_to_json(const AnnotationDoc& doc) {
    json j;
    j["schema"] = kAnnotationSchema;
    json frames = json::array();
    for (const FrameAnnotation& frame : doc.frames) {
        json fj;
        fj["frame_id"] = frame.frame_id;
        if (!frame.timestamp.empty()) fj["timestamp"] = frame.timestamp;
        if (!frame.split.empty()) fj["split"] = frame.split;
        fj["width"] = frame.width;
        fj["height"] = frame.height;
        if (!frame.source_uri.empty()) fj["source_uri"] = frame.source_uri;
        json plates = json::array();
        for (const PlateAnnotation& plate : frame.plates) {
            json pj;
            pj["bbox"] = bbox_to_json(plate.bbox, false);
            pj["lines"] = plate.lines;
            pj["recognizable"] = plate.recognizable;
            if (plate.plate_string) pj["plate_string"] = *plate.plate_string;
            merge_extras(pj, plate.extras);
            plates.push_back(std::move(pj));
        }
        fj["plates"] = std::move(plates);
        merge_extras(fj, frame.extras);
        frames.push_back(std::move(fj));
    }
    j["frames"] = std::move(frames);
    merge_extras(j, doc.extras);
    return j;
}

AnnotationDoc load_annotations(const std::string& path,
                               std::vector<std::string>* warnings) {
    return annotations_from_json(read_file_json(path), path, warnings);
}

void save_annotations(const AnnotationDoc& doc, const std::string& path) {
    write_file_json(annotations_to_json(doc), path);
}

// ---------------------------------------------------------------------------
// Fixtures

const FramePlateFixtures* FixtureDoc::find_plates(std::int64_t frame_id) const {
    for (const FramePlateFixtures& f : plate_detections) {
        if (f.frame_id == frame_id) return &f;
    }
    return nullptr;
}

const CharListFixture* FixtureDoc::find_char_list(
    const std::string& crop_id) const {
    for (const CharListFixture& c : char_lists) {
        if (c.crop_id == crop_id) return &c;
    }
    return nullptr;
}

const CharTensorFixture* FixtureDoc::find_char_tensor(
    const std::string& crop_id) const {
    for (const CharTensorFixture& c : char_tensors) {
        if (c.crop_id == crop_id) return &c;
    }
    return nullptr;
}

namespace {
constexpr const char* kTensorLayout =
    "row-major cells, channels contiguous per cell: "
    "[objectness, tx, ty, tw, th, class logits 0..34]";
}

GridTensor grid_tensor_from_json(const json& j, const std::string& context) {
    try {
        const int width = static_cast<int>(
            as_int(require(j, "width_cells", context), context + ".width_cells"));
        const int height = static_cast<int>(as_int(
            require(j, "height_cells", context), context + ".height_cells"));
        const int channels = static_cast<int>(
            as_int(require(j, "channels", context), context + ".channels"));
        if (j.contains("layout")) {
            const std::string layout =
                as_string(j["layout"], context + ".layout");
            if (layout != kTensorLayout) {
                throw FieldError(context +
                                 ".layout: unsupported layout declaration \"" +
                                 layout + "\"");
            }
        }
        const json& values =
            as_array(require(j, "values", context), context + ".values");
        std::vector<double> data;
        data.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!values[i].is_number()) {
                throw FieldError(context + ".values[" + std::to_string(i) +
                                 "]: expected a number");
            }
            data.push_back(values[i].get<double>());
        }
        return GridTensor(width, height, channels, std::move(data));
    } catch (const FieldError&) {
        throw;
    } catch (const Error& e) {
        throw FieldError(context + ": " + e.what());
    }
}

json grid_tensor_to_json(const GridTensor& tensor) {
    json j;
    j["width_cells"] = kGridWidthCells;
    j["height_cells"] = kGridHeightCells;
    j["channels"] = kGridChannels;
    j["layout"] = kTensorLayout;
    j["values"] = tensor.values();
    return j;
}

GridTensor load_grid_tensor(const std::string& path) {
    const json j = read_file_json(path);
    try {
        check_schema(j, kGridTensorSchema, path);
        return grid_tensor_from_json(j, path);
    } catch (const FieldError& e) {
        throw ParseError(e.what());
    }
}

void save_grid_tensor(const GridTensor& tensor, const std::string& path) {
    json body = grid_tensor_to_json(tensor);
    json j;
    j["schema"] = kGridTensorSchema;
    for (auto& [key, value] : body.items()) {
        j[key] = std::move(value);
    }
    write_file_json(j, path);
}

FixtureDoc fixtures_from_json(const json& j, const std::string& context,
                              std::vector<std::string>* warnings) {
    std::vector<std::string> violations;
    FixtureDoc doc;
    try {
        check_schema(j, kFixtureSchema, context);
    } catch (const FieldError& e) {
        throw_violations(context, {e.what()});
    }
    doc.extras = collect_extras(
        j, {"schema", "plate_detections", "char_detections", "char_tensors"},
        context, warnings);

    std::set<std::int64_t> seen_frames;
    std::set<std::string> seen_crops;

    if (j.contains("plate_detections")) {
        const json& arr =
            as_array(j["plate_detections"], context + ".plate_detections");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string fat =
                context + ".plate_detections[" + std::to_string(i) + "]";
            const json& fj = arr[i];
            try {
                FramePlateFixtures frame;
                frame.frame_id =
                    as_int(require(fj, "frame_id", fat), fat + ".frame_id");
                if (!seen_frames.insert(frame.frame_id).second) {
                    throw FieldError(fat + ": duplicate frame_id " +
                                     std::to_string(frame.frame_id));
                }
                frame.extras = collect_extras(fj, {"frame_id", "detections"},
                                              fat, warnings);
                const json& dets = as_array(require(fj, "detections", fat),
                                            fat + ".detections");
                for (std::size_t d = 0; d < dets.size(); ++d) {
                    const std::string dat =
                        fat + ".detections[" + std::to_string(d) + "]";
                    const json& dj = dets[d];
                    PlateDetectionFixture det{
                        as_string(require(dj, "crop_id", dat), dat + ".crop_id"),
                        bbox_from_json(require(dj, "bbox", dat), dat + ".bbox")};
                    det.extras = collect_extras(dj, {"crop_id", "bbox"}, dat,
                                                warnings);
                    json bbox_extras = collect_extras(dj["bbox"], kBBoxKeys,
                                                      dat + ".bbox", warnings);
                    if (!bbox_extras.empty()) {
                        det.extras["bbox"] = std::move(bbox_extras);
                    }
                    frame.detections.push_back(std::move(det));
                }
                doc.plate_detections.push_back(std::move(frame));
            } catch (const FieldError& e) {
                violations.push_back(e.what());
            }
        }
    }

    if (j.contains("char_detections")) {
        const json& arr =
            as_array(j["char_detections"], context + ".char_detections");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string cat =
                context + ".char_detections[" + std::to_string(i) + "]";
            const json& cj = arr[i];
            try {
                CharListFixture fixture;
                fixture.crop_id =
                    as_string(require(cj, "crop_id", cat), cat + ".crop_id");
                if (!seen_crops.insert(fixture.crop_id).second) {
                    throw FieldError(cat + ": duplicate crop_id \"" +
                                     fixture.crop_id + "\"");
                }
                if (cj.contains("coords")) {
                    const std::string coords =
                        as_string(cj["coords"], cat + ".coords");
                    if (coords == "crop") {
                        fixture.coords = CharCoordSpace::Crop;
                    } else if (coords == "frame") {
                        fixture.coords = CharCoordSpace::Frame;
                    } else {
                        throw FieldError(cat +
                                         ".coords: expected \"crop\" or "
                                         "\"frame\", got \"" +
                                         coords + "\"");
                    }
                }
                fixture.extras = collect_extras(
                    cj, {"crop_id", "coords", "chars"}, cat, warnings);
                const json& chars =
                    as_array(require(cj, "chars", cat), cat + ".chars");
                for (std::size_t c = 0; c < chars.size(); ++c) {
                    const std::string chat =
                        cat + ".chars[" + std::to_string(c) + "]";
                    const json& chj = chars[c];
                    BBox bare =
                        bbox_from_json(require(chj, "bbox", chat), chat + ".bbox");
                    const int class_id =
                        chj.contains("class_id")
                            ? static_cast<int>(as_int(chj["class_id"],
                                                      chat + ".class_id"))
                            : bare.class_id();
                    const double confidence =
                        chj.contains("confidence")
                            ? as_number(chj["confidence"], chat + ".confidence")
                            : bare.score();
                    if (class_id < 0 || class_id >= kNumCharClasses) {
                        throw FieldError(chat + ".class_id: must be in [0, " +
                                         std::to_string(kNumCharClasses) +
                                         "), got " + std::to_string(class_id));
                    }
                    try {
                        fixture.chars.push_back(CharDetection{
                            BBox(bare.x1(), bare.y1(), bare.x2(), bare.y2(),
                                 confidence, class_id)});
                    } catch (const ContractViolation& e) {
                        throw FieldError(chat + ": " + e.what());
                    }
                }
                doc.char_lists.push_back(std::move(fixture));
            } catch (const FieldError& e) {
                violations.push_back(e.what());
            }
        }
    }

    if (j.contains("char_tensors")) {
        const json& arr = as_array(j["char_tensors"], context + ".char_tensors");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string cat =
                context + ".char_tensors[" + std::to_string(i) + "]";
            const json& cj = arr[i];
            try {
                const std::string crop_id =
                    as_string(require(cj, "crop_id", cat), cat + ".crop_id");
                if (!seen_crops.insert(crop_id).second) {
                    throw FieldError(cat + ": duplicate crop_id \"" + crop_id +
                                     "\"");
                }
                GridTensor tensor = grid_tensor_from_json(
                    require(cj, "tensor", cat), cat + ".tensor");
                CharTensorFixture fixture{crop_id, std::move(tensor)};
                fixture.extras = collect_extras(cj, {"crop_id", "tensor"}, cat,
                                                warnings);
                doc.char_tensors.push_back(std::move(fixture));
            } catch (const FieldError& e) {
                violations.push_back(e.what());
            }
        }
    }

    if (!violations.empty()) {
        throw_violations(context, violations);
    }
    return doc;
}

json fixtures_to_json(const FixtureDoc& doc) {
    json j;
    j["schema"] = kFixtureSchema;
    json plate_arr = json::array();
    for (const FramePlateFixtures& frame : doc.plate_detections) {
        json fj;
        fj["frame_id"] = frame.frame_id;
        json dets = json::array();
        for (const PlateDetectionFixture& det : frame.detections) {
            json dj;
            dj["crop_id"] = det.crop_id;
            dj["bbox"] = bbox_to_json(det.bbox, true);
            merge_extras(dj, det.extras);
            dets.push_back(std::move(dj));
        }
        fj["detections"] = std::move(dets);
        merge_extras(fj, frame.extras);
        plate_arr.push_back(std::move(fj));
    }
    j["plate_detections"] = std::move(plate_arr);

    json char_arr = json::array();
    for (const CharListFixture& fixture : doc.char_lists) {
        json cj;
        cj["crop_id"] = fixture.crop_id;
        cj["coords"] =
            fixture.coords == CharCoordSpace::Crop ? "crop" : "frame";
        json chars = json::array();
        for (const CharDetection& det : fixture.chars) {
            chars.push_back({{"bbox", bbox_to_json(det.bbox, true)}});
        }
        cj["chars"] = std::move(chars);
        merge_extras(cj, fixture.extras);
        char_arr.push_back(std::move(cj));
    }
    j["char_detections"] = std::move(char_arr);

    json tensor_arr = json::array();
    for (const CharTensorFixture& fixture : doc.char_tensors) {
        json cj;
        cj["crop_id"] = fixture.crop_id;
        cj["tensor"] = grid_tensor_to_json(fixture.tensor);
        merge_extras(cj, fixture.extras);
        tensor_arr.push_back(std::move(cj));
    }
    j["char_tensors"] = std::move(tensor_arr);
    merge_extras(j, doc.extras);
    return j;
}

FixtureDoc load_fixtures(const std::string& path,
                         std::vector<std::string>* warnings) {
    return fixtures_from_json(read_file_json(path), path, warnings);
}

void save_fixtures(const FixtureDoc& doc, const std::string& path) {
    write_file_json(fixtures_to_json(doc), path);
}

// ---------------------------------------------------------------------------
// Results

ResultsDoc results_from_json(const json& j, const std::string& context,
                             std::vector<std::string>* warnings) {
    std::vector<std::string> violations;
    ResultsDoc doc;
    try {
        check_schema(j, kResultsSchema, context);
    } catch (const FieldError& e) {
        throw_violations(context, {e.what()});
    }
    if (j.contains("config") && j["config"].is_object()) {
        doc.config = j["config"];
    }
    if (j.contains("timing") && j["timing"].is_object()) {
        doc.timing = j["timing"];
    }
    doc.extras = collect_extras(j, {"schema", "config", "frames", "timing"},
                                context, warnings);

    const json* frames = nullptr;
    try {
        frames = &as_array(require(j, "frames", context), context + ".frames");
    } catch (const FieldError& e) {
        throw_violations(context, {e.what()});
    }

    for (std::size_t i = 0; i < frames->size(); ++i) {
        const std::string fat = context + ".frames[" + std::to_string(i) + "]";
        const json& fj = (*frames)[i];
        try {
            FrameResultRecord frame;
            frame.frame_id =
                as_int(require(fj, "frame_id", fat), fat + ".frame_id");
            frame.extras = collect_extras(
                fj, {"frame_id", "readings", "rejected", "errors"}, fat,
                warnings);

            if (fj.contains("readings")) {
                const json& arr = as_array(fj["readings"], fat + ".readings");
                for (std::size_t r = 0; r < arr.size(); ++r) {
                    const std::string rat =
                        fat + ".readings[" + std::to_string(r) + "]";
                    const json& rj = arr[r];
                    ReadingRecord rec{
                        as_string(require(rj, "crop_id", rat), rat + ".crop_id"),
                        bbox_from_json(require(rj, "bbox", rat), rat + ".bbox")};
                    rec.category = as_string(require(rj, "category", rat),
                                             rat + ".category");
                    rec.raw_string = as_string(require(rj, "raw_string", rat),
                                               rat + ".raw_string");
                    rec.final_string = as_string(
                        require(rj, "final_string", rat), rat + ".final_string");
                    rec.valid =
                        as_bool(require(rj, "valid", rat), rat + ".valid");
                    if (rj.contains("changes")) {
                        rec.changes =
                            changes_from_json(rj["changes"], rat + ".changes");
                    }
                    rec.extras = collect_extras(
                        rj,
                        {"crop_id", "bbox", "category", "raw_string",
                         "final_string", "valid", "changes"},
                        rat, warnings);
                    json bbox_extras = collect_extras(rj["bbox"], kBBoxKeys,
                                                      rat + ".bbox", warnings);
                    if (!bbox_extras.empty()) {
                        rec.extras["bbox"] = std::move(bbox_extras);
                    }
                    frame.readings.push_back(std::move(rec));
                }
            }
            if (fj.contains("rejected")) {
                const json& arr = as_array(fj["rejected"], fat + ".rejected");
                for (std::size_t r = 0; r < arr.size(); ++r) {
                    const std::string rat =
                        fat + ".rejected[" + std::to_string(r) + "]";
                    const json& rj = arr[r];
                    RejectedRecord rec{
                        as_string(require(rj, "crop_id", rat), rat + ".crop_id"),
                        bbox_from_json(require(rj, "bbox", rat), rat + ".bbox")};
                    rec.extras = collect_extras(rj, {"crop_id", "bbox"}, rat,
                                                warnings);
                    frame.rejected.push_back(std::move(rec));
                }
            }
            if (fj.contains("errors")) {
                const json& arr = as_array(fj["errors"], fat + ".errors");
                for (std::size_t r = 0; r < arr.size(); ++r) {
                    const std::string rat =
                        fat + ".errors[" + std::to_string(r) + "]";
                    const json& rj = arr[r];
                    PlateErrorRecord rec{
                        as_string(require(rj, "crop_id", rat), rat + ".crop_id"),
                        bbox_from_json(require(rj, "bbox", rat), rat + ".bbox"),
                        as_string(require(rj, "message", rat), rat + ".message")};
                    rec.extras = collect_extras(rj, {"crop_id", "bbox", "message"},
                                                rat, warnings);
                    frame.errors.push_back(std::move(rec));
                }
            }
            doc.frames.push_back(std::move(frame));
        } catch (const FieldError& e) {
            violations.push_back(e.what());
        }
    }
    if (!violations.empty()) {
        throw_violations(context, violations);
    }
    return doc;
}

json results_to_json(const ResultsDoc& doc) {
    json j;
    j["schema"] = kResultsSchema;
    j["config"] = doc.config;
    json frames = json::array();
    for (const FrameResultRecord& frame : doc.frames) {
        json fj;
        fj["frame_id"] = frame.frame_id;
        json readings = json::array();
        for (const ReadingRecord& rec : frame.readings) {
            json rj;
            rj["crop_id"] = rec.crop_id;
            rj["bbox"] = bbox_to_json(rec.bbox, true);
            rj["category"] = rec.category;
            rj["raw_string"] = rec.raw_string;
            rj["final_string"] = rec.final_string;
            rj["valid"] = rec.valid;
            rj["changes"] = changes_to_json(rec.changes);
            merge_extras(rj, rec.extras);
            readings.push_back(std::move(rj));
        }
        fj["readings"] = std::move(readings);
        json rejected = json::array();
        for (const RejectedRecord& rec : frame.rejected) {
            json rj;
            rj["crop_id"] = rec.crop_id;
            rj["bbox"] = bbox_to_json(rec.bbox, true);
            merge_extras(rj, rec.extras);
            rejected.push_back(std::move(rj));
        }
        fj["rejected"] = std::move(rejected);
        json errors = json::array();
        for (const PlateErrorRecord& rec : frame.errors) {
            json rj;
            rj["crop_id"] = rec.crop_id;
            rj["bbox"] = bbox_to_json(rec.bbox, true);
            rj["message"] = rec.message;
            merge_extras(rj, rec.extras);
            errors.push_back(std::move(rj));
        }
        fj["errors"] = std::move(errors);
        merge_extras(fj, frame.extras);
        frames.push_back(std::move(fj));
    }
    j["frames"] = std::move(frames);
    if (!doc.timing.empty()) {
        j["timing"] = doc.timing;
    }
    merge_extras(j, doc.extras);
    return j;
}

ResultsDoc load_results(const std::string& path,
                        std::vector<std::string>* warnings) {
    return results_from_json(read_file_json(path), path, warnings);
}

void save_results(const ResultsDoc& doc, const std::string& path) {
    write_file_json(results_to_json(doc), path);
}

// ---------------------------------------------------------------------------
// Summary

DatasetSummary summarize(const AnnotationDoc& doc) {
    DatasetSummary s;
    s.total_frames = doc.frames.size();
    for (const FrameAnnotation& frame : doc.frames) {
        ++s.frames_by_split[frame.split.empty() ? "(untagged)" : frame.split];
        for (const PlateAnnotation& plate : frame.plates) {
            if (plate.lines == 1) {
                (plate.recognizable ? s.single_recognizable
                                    : s.single_unrecognizable)++;
            } else {
                (plate.recognizable ? s.double_recognizable
                                    : s.double_unrecognizable)++;
            }
        }
    }
    return s;
}

std::string render_summary(const DatasetSummary& s) {
    std::ostringstream out;
    out << "Frames by split\n";
    for (const auto& [split, count] : s.frames_by_split) {
        out << "  " << std::left << std::setw(12) << split << std::right
            << std::setw(8) << count << "\n";
    }
    out << "  " << std::left << std::setw(12) << "total" << std::right
        << std::setw(8) << s.total_frames << "\n\n";

    out << "Plates            recognizable  unrecognizable     total\n";
    const auto row = [&](const char* label, std::size_t a, std::size_t b) {
        out << "  " << std::left << std::setw(8) << label << std::right
            << std::setw(12) << a << std::setw(16) << b << std::setw(10)
            << (a + b) << "\n";
    };
    row("single", s.single_recognizable, s.single_unrecognizable);
    row("double", s.double_recognizable, s.double_unrecognizable);
    row("total", s.total_recognizable(), s.total_unrecognizable());
    return out.str();
}

} // namespace alpr
