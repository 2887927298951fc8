#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alpr/dataset_io.hpp"
#include "alpr/geometry.hpp"

namespace alpr {

/// Outcome of greedy one-to-one detection matching within a frame.
struct DetectionMatching {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    /// pred_to_gt[i] is the ground-truth index matched to prediction i,
    /// or nullopt when prediction i is a false positive.
    std::vector<std::optional<std::size_t>> pred_to_gt;
};

/// Greedy matching in descending prediction score: each prediction takes
/// the unconsumed ground truth it overlaps most, and counts as a true
/// positive iff that IoU reaches the threshold.
DetectionMatching match_detections(const std::vector<BBox>& preds,
                                   const std::vector<BBox>& gts,
                                   double iou_threshold = 0.5);

/// Levenshtein edit distance (unit-cost substitution, insertion, deletion).
std::size_t char_errors(std::string_view pred, std::string_view gt);

struct RecognitionCounts {
    std::size_t total = 0;
    std::size_t exact_correct = 0;
    std::size_t within_1 = 0;
    std::size_t within_2 = 0;

    double accuracy() const { return ratio(exact_correct); }
    double accuracy_1() const { return ratio(within_1); }
    double accuracy_2() const { return ratio(within_2); }

private:
    double ratio(std::size_t n) const {
        return total == 0 ? 0.0 : static_cast<double>(n) /
                                      static_cast<double>(total);
    }
};

struct EvalReport {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    RecognitionCounts recognition;
    RecognitionCounts single_line;
    RecognitionCounts double_line;

    double precision() const {
        const std::size_t denom = true_positives + false_positives;
        return denom == 0 ? 0.0 : static_cast<double>(true_positives) /
                                      static_cast<double>(denom);
    }

    json to_json() const;
};

/// Score a results document against ground-truth annotations: detection
/// precision by greedy IoU matching over every reported plate box, and
/// recognition accuracy (exact and within 1 or 2 character errors) over
/// the ground-truth-recognizable plates, split by line count. Results
/// referencing a frame absent from the annotations raise EvalError.
EvalReport evaluate(const ResultsDoc& results, const AnnotationDoc& annotations,
                    double iou_threshold = 0.5);

/// Render the recognition table plus a detection precision line.
std::string render_report(const EvalReport& report);

} // namespace alpr
