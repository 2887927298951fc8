#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "alpr/dataset_io.hpp"
#include "alpr/errors.hpp"

using namespace alpr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("alpr_io_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

AnnotationDoc sample_annotations() {
    AnnotationDoc doc;
    FrameAnnotation f1;
    f1.frame_id = 17;
    f1.timestamp = "2017-12-01T08:30:00";
    f1.split = "test";
    PlateAnnotation p1{BBox(100.25, 200.5, 260.75, 280.125, 1.0, 0)};
    p1.lines = 1;
    p1.recognizable = true;
    p1.plate_string = "SBA1234E";
    f1.plates.push_back(p1);
    PlateAnnotation p2{BBox(10, 20, 45, 48)};
    p2.lines = 2;
    p2.recognizable = false;
    f1.plates.push_back(p2);
    doc.frames.push_back(f1);

    FrameAnnotation f2;
    f2.frame_id = 18;
    f2.split = "train";
    doc.frames.push_back(f2);
    return doc;
}

} // namespace

TEST_CASE("annotations survive a save/load round trip") {
    TempDir dir;
    const std::string path = dir.file("ann.json");
    const AnnotationDoc doc = sample_annotations();
    save_annotations(doc, path);

    const AnnotationDoc loaded = load_annotations(path);
    REQUIRE(loaded.frames.size() == 2);
    CHECK(loaded.frames[0].frame_id == 17);
    CHECK(loaded.frames[0].split == "test");
    REQUIRE(loaded.frames[0].plates.size() == 2);
    CHECK(loaded.frames[0].plates[0].plate_string == "SBA1234E");
    CHECK(loaded.frames[0].plates[0].bbox.x1() == 100.25);
    CHECK_FALSE(loaded.frames[0].plates[1].recognizable);
    CHECK_FALSE(loaded.frames[0].plates[1].plate_string.has_value());
    CHECK(annotations_to_json(loaded) == annotations_to_json(doc));
}

TEST_CASE("minimal one-frame document loads") {
    TempDir dir;
    const std::string path = dir.file("min.json");
    write_text(path, R"({"schema":"alpr.annotations/1",
                         "frames":[{"frame_id":1,"plates":[]}]})");
    const AnnotationDoc doc = load_annotations(path);
    REQUIRE(doc.frames.size() == 1);
    CHECK(doc.frames[0].frame_id == 1);
    CHECK(doc.frames[0].plates.empty());
    CHECK(doc.frames[0].width == 1920.0);
}

TEST_CASE("schema violations carry field paths") {
    TempDir dir;
    const std::string path = dir.file("bad.json");

    SUBCASE("recognizable plate missing its string") {
        write_text(path, R"({"schema":"alpr.annotations/1","frames":[
            {"frame_id":1,"plates":[
                {"bbox":{"x1":0,"y1":0,"x2":60,"y2":60},
                 "lines":1,"recognizable":true}]}]})");
        CHECK_THROWS_WITH_AS(
            load_annotations(path),
            doctest::Contains("frames[0].plates[0]: recognizable plate "
                              "missing plate_string"),
            ParseError);
    }
    SUBCASE("bad line count") {
        write_text(path, R"({"schema":"alpr.annotations/1","frames":[
            {"frame_id":1,"plates":[
                {"bbox":{"x1":0,"y1":0,"x2":60,"y2":60},
                 "lines":3,"recognizable":false}]}]})");
        CHECK_THROWS_WITH_AS(load_annotations(path),
                             doctest::Contains("lines: must be 1 or 2"),
                             ParseError);
    }
    SUBCASE("degenerate bbox") {
        write_text(path, R"({"schema":"alpr.annotations/1","frames":[
            {"frame_id":1,"plates":[
                {"bbox":{"x1":10,"y1":0,"x2":10,"y2":60},
                 "lines":1,"recognizable":false}]}]})");
        CHECK_THROWS_WITH_AS(load_annotations(path),
                             doctest::Contains("bbox"), ParseError);
    }
    SUBCASE("duplicate frame ids") {
        write_text(path, R"({"schema":"alpr.annotations/1","frames":[
            {"frame_id":1,"plates":[]},{"frame_id":1,"plates":[]}]})");
        CHECK_THROWS_WITH_AS(load_annotations(path),
                             doctest::Contains("duplicate frame_id 1"),
                             ParseError);
    }
    SUBCASE("wrong schema tag") {
        write_text(path, R"({"schema":"alpr.results/1","frames":[]})");
        CHECK_THROWS_WITH_AS(load_annotations(path),
                             doctest::Contains("schema"), ParseError);
    }
    SUBCASE("all violations are collected, not just the first") {
        write_text(path, R"({"schema":"alpr.annotations/1","frames":[
            {"frame_id":1,"plates":[
                {"bbox":{"x1":0,"y1":0,"x2":60,"y2":60},
                 "lines":3,"recognizable":false},
                {"bbox":{"x1":0,"y1":0,"x2":60,"y2":60},
                 "lines":1,"recognizable":true}]}]})");
        try {
            load_annotations(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("2 schema violation(s)") != std::string::npos);
            CHECK(msg.find("plates[0]") != std::string::npos);
            CHECK(msg.find("plates[1]") != std::string::npos);
        }
    }
}

TEST_CASE("missing and corrupt files give path context") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(load_annotations(dir.file("nope.json")),
                         doctest::Contains("cannot open"), ParseError);

    const std::string path = dir.file("corrupt.json");
    write_text(path, R"({"schema":"alpr.annotations/1", "frames": [ {"fra)");
    try {
        load_annotations(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(path) != std::string::npos);
        CHECK(msg.find("byte") != std::string::npos); // parse offset
    }
}

TEST_CASE("unknown fields are preserved and warned about") {
    TempDir dir;
    const std::string path = dir.file("extra.json");
    write_text(path, R"({"schema":"alpr.annotations/1","camera_rig":"front",
        "frames":[{"frame_id":5,"operator":"patrol-7","plates":[
            {"bbox":{"x1":0,"y1":0,"x2":60,"y2":60,"blur":0.25},
             "lines":1,"recognizable":false,"night":true}]}]})");

    std::vector<std::string> warnings;
    const AnnotationDoc doc = load_annotations(path, &warnings);
    REQUIRE(warnings.size() == 4);
    CHECK(warnings[0].find("camera_rig") != std::string::npos);

    const std::string out = dir.file("extra_out.json");
    save_annotations(doc, out);
    const AnnotationDoc reloaded = load_annotations(out);
    const json j = annotations_to_json(reloaded);
    CHECK(j["camera_rig"] == "front");
    CHECK(j["frames"][0]["operator"] == "patrol-7");
    CHECK(j["frames"][0]["plates"][0]["night"] == true);
    CHECK(j["frames"][0]["plates"][0]["bbox"]["blur"] == 0.25);
}

TEST_CASE("fixture documents round trip with validation") {
    TempDir dir;
    FixtureDoc doc;
    FramePlateFixtures frame;
    frame.frame_id = 3;
    frame.detections.push_back(
        PlateDetectionFixture{"3:0", BBox(10, 10, 140.5, 90.25, 0.875, 0)});
    doc.plate_detections.push_back(frame);

    CharListFixture chars;
    chars.crop_id = "3:0";
    chars.coords = CharCoordSpace::Frame;
    chars.chars.push_back(
        CharDetection{BBox(12, 20, 30, 55, 0.9375, 27)});
    doc.char_lists.push_back(chars);

    CharTensorFixture tensor{"3:1", GridTensor::zeros()};
    tensor.tensor.at(4, 2, kChObjectness) = 3.5;
    doc.char_tensors.push_back(std::move(tensor));

    const std::string path = dir.file("fx.json");
    save_fixtures(doc, path);
    const FixtureDoc loaded = load_fixtures(path);
    REQUIRE(loaded.plate_detections.size() == 1);
    CHECK(loaded.plate_detections[0].detections[0].bbox.score() == 0.875);
    REQUIRE(loaded.char_lists.size() == 1);
    CHECK(loaded.char_lists[0].coords == CharCoordSpace::Frame);
    CHECK(loaded.char_lists[0].chars[0].class_id() == 27);
    REQUIRE(loaded.char_tensors.size() == 1);
    CHECK(loaded.char_tensors[0].tensor.at(4, 2, kChObjectness) == 3.5);
    CHECK(fixtures_to_json(loaded) == fixtures_to_json(doc));
}

TEST_CASE("fixture validation rejects duplicates and bad payloads") {
    TempDir dir;
    const std::string path = dir.file("fx.json");

    SUBCASE("duplicate crop ids across lists and tensors") {
        json j;
        j["schema"] = kFixtureSchema;
        j["char_detections"] =
            json::array({json{{"crop_id", "a"}, {"chars", json::array()}},
                         json{{"crop_id", "a"}, {"chars", json::array()}}});
        write_text(path, j.dump());
        CHECK_THROWS_WITH_AS(load_fixtures(path),
                             doctest::Contains("duplicate crop_id"),
                             ParseError);
    }
    SUBCASE("tensor dimensions checked at load") {
        json j;
        j["schema"] = kFixtureSchema;
        j["char_tensors"] = json::array(
            {json{{"crop_id", "t"},
                  {"tensor", json{{"width_cells", 13},
                                  {"height_cells", 13},
                                  {"channels", 40},
                                  {"values", json::array()}}}}});
        write_text(path, j.dump());
        CHECK_THROWS_WITH_AS(load_fixtures(path),
                             doctest::Contains("36x25x40"), ParseError);
    }
    SUBCASE("bad coords tag") {
        json j;
        j["schema"] = kFixtureSchema;
        j["char_detections"] = json::array(
            {json{{"crop_id", "a"},
                  {"coords", "polar"},
                  {"chars", json::array()}}});
        write_text(path, j.dump());
        CHECK_THROWS_WITH_AS(load_fixtures(path),
                             doctest::Contains("polar"), ParseError);
    }
}

TEST_CASE("grid tensor files round trip and validate their layout") {
    TempDir dir;
    const std::string path = dir.file("tensor.json");
    GridTensor t = GridTensor::zeros();
    t.at(7, 11, kChTw) = -0.625;
    save_grid_tensor(t, path);
    const GridTensor loaded = load_grid_tensor(path);
    CHECK(loaded.at(7, 11, kChTw) == -0.625);
    CHECK(loaded.values() == t.values());

    json j = json::parse(read_text(path));
    j["layout"] = "column-major";
    write_text(path, j.dump());
    CHECK_THROWS_WITH_AS(load_grid_tensor(path),
                         doctest::Contains("layout"), ParseError);
}

TEST_CASE("results documents round trip losslessly") {
    TempDir dir;
    ResultsDoc doc;
    doc.config = json{{"det_iou", 0.5}};
    FrameResultRecord frame;
    frame.frame_id = 9;
    ReadingRecord reading{"9:0", BBox(5.5, 6.25, 130.75, 70.0, 0.96875, 0)};
    reading.category = "single";
    reading.raw_string = "5BA1234E";
    reading.final_string = "SBA1234E";
    reading.valid = true;
    reading.changes.push_back(CharChange{0, '5', 'S'});
    frame.readings.push_back(reading);
    frame.rejected.push_back(RejectedRecord{"9:1", BBox(0, 0, 30, 20, 0.5, 0)});
    frame.errors.push_back(
        PlateErrorRecord{"9:2", BBox(0, 0, 60, 60, 0.25, 0), "no data"});
    doc.frames.push_back(frame);
    doc.timing = json{{"fps", 123.5}};

    const std::string path = dir.file("results.json");
    save_results(doc, path);
    const ResultsDoc loaded = load_results(path);
    REQUIRE(loaded.frames.size() == 1);
    CHECK(loaded.frames[0].readings[0].final_string == "SBA1234E");
    CHECK(loaded.frames[0].readings[0].changes[0] == CharChange{0, '5', 'S'});
    CHECK(loaded.frames[0].rejected[0].crop_id == "9:1");
    CHECK(loaded.frames[0].errors[0].message == "no data");
    CHECK(loaded.timing["fps"] == 123.5);
    CHECK(results_to_json(loaded) == results_to_json(doc));
}

TEST_CASE("documents are byte-stable after one normalization pass") {
    TempDir dir;

    // integers in the source normalize to doubles on the first write;
    // after that the bytes must not change again
    const std::string src = dir.file("src.json");
    write_text(src, R"({"schema":"alpr.annotations/1","frames":[
        {"frame_id":1,"width":1280,"height":720,"plates":[
            {"bbox":{"x1":10,"y1":20,"x2":110,"y2":77.125},
             "lines":2,"recognizable":true,"plate_string":"SKV988D"}]}]})");

    const std::string pass1 = dir.file("pass1.json");
    const std::string pass2 = dir.file("pass2.json");
    save_annotations(load_annotations(src), pass1);
    save_annotations(load_annotations(pass1), pass2);
    CHECK(read_text(pass1) == read_text(pass2));
}

TEST_CASE("summarize counts plates and frames") {
    SUBCASE("empty document") {
        const DatasetSummary s = summarize(AnnotationDoc{});
        CHECK(s.total_frames == 0);
        CHECK(s.total_plates() == 0);
    }
    SUBCASE("constructed fixture") {
        AnnotationDoc doc;
        FrameAnnotation frame;
        frame.frame_id = 1;
        frame.split = "train";
        for (int i = 0; i < 2; ++i) {
            PlateAnnotation p{BBox(i * 100.0, 0, i * 100.0 + 60, 60)};
            p.lines = 1;
            p.recognizable = true;
            p.plate_string = "SBA1234E";
            frame.plates.push_back(p);
        }
        PlateAnnotation q{BBox(500, 0, 540, 40)};
        q.lines = 2;
        q.recognizable = false;
        frame.plates.push_back(q);
        doc.frames.push_back(frame);

        const DatasetSummary s = summarize(doc);
        CHECK(s.single_recognizable == 2);
        CHECK(s.single_unrecognizable == 0);
        CHECK(s.double_recognizable == 0);
        CHECK(s.double_unrecognizable == 1);
        CHECK(s.frames_by_split.at("train") == 1);
        CHECK(s.total_plates() == 3);

        const std::string table = render_summary(s);
        CHECK(table.find("single") != std::string::npos);
        CHECK(table.find("train") != std::string::npos);
    }
    SUBCASE("row and column sums equal the grand total") {
        std::mt19937_64 rng(67);
        AnnotationDoc doc;
        std::uniform_int_distribution<int> plate_count(0, 6);
        std::uniform_int_distribution<int> coin(0, 1);
        for (int f = 0; f < 40; ++f) {
            FrameAnnotation frame;
            frame.frame_id = f;
            frame.split = coin(rng) == 0 ? "train" : "test";
            const int n = plate_count(rng);
            for (int p = 0; p < n; ++p) {
                PlateAnnotation plate{BBox(p * 80.0, 0, p * 80.0 + 60, 60)};
                plate.lines = 1 + coin(rng);
                plate.recognizable = coin(rng) == 0;
                if (plate.recognizable) plate.plate_string = "SBA1234E";
                frame.plates.push_back(plate);
            }
            doc.frames.push_back(frame);
        }
        const DatasetSummary s = summarize(doc);
        CHECK(s.total_single() + s.total_double() == s.total_plates());
        CHECK(s.total_recognizable() + s.total_unrecognizable() ==
              s.total_plates());
        std::size_t split_sum = 0;
        for (const auto& [split, count] : s.frames_by_split) split_sum += count;
        CHECK(split_sum == s.total_frames);
    }
}
