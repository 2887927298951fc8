#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "alpr/pipeline.hpp"

namespace alpr::cli {

struct RunOptions {
    std::string frames_path;         // frame list (annotation document)
    std::string plate_fixtures_path; // plate detector stand-in
    std::string char_fixtures_path;  // character recognizer stand-in
    std::string out_path = "results.json";
    PipelineConfig config;
};

struct EvalOptions {
    std::string results_path;
    std::string annotations_path;
    std::string out_path = "eval_report.json";
    double det_iou = 0.5;
};

struct BenchOptions {
    std::size_t frames = 1000;
    int max_plates = 10;
    std::uint64_t seed = 1;
    int max_confusions = 3;
    double tensor_rate = 0.0;
    double duplicate_rate = 0.0;
    double sub_min_rate = 0.0;
    std::string out_path; // optional timing document
    PipelineConfig config;
};

struct DecodeGridOptions {
    std::string tensor_path;
    double char_conf = 0.25;
    double char_iou = 0.5;
};

// Each command returns a process exit status: 0 unless a fatal error
// occurred. Per-plate soft errors inside the pipeline never fail a run.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);
int cmd_decode_grid(const DecodeGridOptions& opts, std::ostream& out,
                    std::ostream& err);

} // namespace alpr::cli
