#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "alpr/dataset_io.hpp"
#include "alpr/format_rules.hpp"

namespace alpr {

/// Knobs for the synthetic corpus generator used by the bench workflow
/// and the end-to-end tests.
struct SyntheticOptions {
    std::size_t frames = 100;
    int max_plates_per_frame = 10;
    std::uint64_t seed = 1;
    int max_confusions = 3;    // injected per plate, 0..max
    double sub_min_rate = 0.0; // fraction of plates below the size filter
    double tensor_rate = 0.0;  // fraction of crops backed by a grid tensor
    double frame_coords_rate = 0.0; // char lists given in frame coordinates
    double duplicate_rate = 0.0;    // extra near-duplicate plate detections
    double min_plate_px = 50.0;
    double frame_width = 1920.0;
    double frame_height = 720.0;
};

struct SyntheticCorpus {
    AnnotationDoc annotations;
    FixtureDoc fixtures;
};

/// Uniformly random plate layout that satisfies every format rule.
PlateLayout random_layout(std::mt19937_64& rng);

/// Corrupt up to `count` characters of a valid plate string with
/// shape-confusions drawn from the correction tables, keeping only
/// combinations that correct() provably undoes (a confusion that turns
/// the plate into a different fully-valid string is unrecoverable by any
/// reader and is re-drawn). Returns the corrupted string.
std::string inject_confusions(const std::string& plate, int count,
                              std::mt19937_64& rng);

/// Build matching annotation and fixture documents: every recognizable
/// fixture plate spells a valid plate (with injected confusions the
/// pipeline must undo), every sub-minimum plate is annotated
/// unrecognizable. Deterministic for a fixed option set.
SyntheticCorpus make_corpus(const SyntheticOptions& opts);

} // namespace alpr
