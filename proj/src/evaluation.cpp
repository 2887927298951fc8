#include "alpr/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "alpr/errors.hpp"

namespace alpr {

DetectionMatching match_detections(const std::vector<BBox>& preds,
                                   const std::vector<BBox>& gts,
                                   double iou_threshold) {
    DetectionMatching m;
    m.pred_to_gt.assign(preds.size(), std::nullopt);

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].score() != preds[b].score())
            return preds[a].score() > preds[b].score();
        return a < b;
    });

    std::vector<bool> consumed(gts.size(), false);
    for (std::size_t p : order) {
        double best_iou = 0.0;
        std::size_t best_gt = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (consumed[g]) continue;
            const double overlap = iou(preds[p], gts[g]);
            if (overlap > best_iou) {
                best_iou = overlap;
                best_gt = g;
            }
        }
        if (best_gt < gts.size() && best_iou >= iou_threshold) {
            consumed[best_gt] = true;
            m.pred_to_gt[p] = best_gt;
            ++m.true_positives;
        } else {
            ++m.false_positives;
        }
    }
    m.false_negatives = gts.size() - m.true_positives;
    return m;
}

std::size_t char_errors(std::string_view pred, std::string_view gt) {
    // Two-row Levenshtein.
    const std::size_t n = gt.size();
    std::vector<std::size_t> prev(n + 1), curr(n + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 0; i < pred.size(); ++i) {
        curr[0] = i + 1;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t subst = prev[j] + (pred[i] == gt[j] ? 0 : 1);
            curr[j + 1] = std::min({subst, prev[j + 1] + 1, curr[j] + 1});
        }
        std::swap(prev, curr);
    }
    return prev[n];
}

namespace {

void count_plate(RecognitionCounts& counts, std::size_t errors) {
    ++counts.total;
    if (errors == 0) ++counts.exact_correct;
    if (errors <= 1) ++counts.within_1;
    if (errors <= 2) ++counts.within_2;
}

json recognition_to_json(const RecognitionCounts& c) {
    return json{{"total", c.total},
                {"exact_correct", c.exact_correct},
                {"within_1", c.within_1},
                {"within_2", c.within_2},
                {"accuracy", c.accuracy()},
                {"accuracy_1", c.accuracy_1()},
                {"accuracy_2", c.accuracy_2()}};
}

} // namespace

json EvalReport::to_json() const {
    return json{{"detection",
                 json{{"true_positives", true_positives},
                      {"false_positives", false_positives},
                      {"false_negatives", false_negatives},
                      {"precision", precision()}}},
                {"recognition", recognition_to_json(recognition)},
                {"by_lines",
                 json{{"single", recognition_to_json(single_line)},
                      {"double", recognition_to_json(double_line)}}}};
}

EvalReport evaluate(const ResultsDoc& results, const AnnotationDoc& annotations,
                    double iou_threshold) {
    EvalReport report;

    for (const FrameResultRecord& frame : results.frames) {
        const FrameAnnotation* gt_frame = annotations.find_frame(frame.frame_id);
        if (gt_frame == nullptr) {
            std::ostringstream msg;
            msg << "results reference frame id " << frame.frame_id
                << " which is not in the annotations";
            throw EvalError(msg.str());
        }

        // Every reported plate box is a detector prediction, whether it
        // became a reading, was size-rejected, or failed downstream.
        std::vector<BBox> preds;
        std::vector<const ReadingRecord*> pred_reading;
        for (const ReadingRecord& rec : frame.readings) {
            preds.push_back(rec.bbox);
            pred_reading.push_back(&rec);
        }
        for (const RejectedRecord& rec : frame.rejected) {
            preds.push_back(rec.bbox);
            pred_reading.push_back(nullptr);
        }
        for (const PlateErrorRecord& rec : frame.errors) {
            preds.push_back(rec.bbox);
            pred_reading.push_back(nullptr);
        }

        std::vector<BBox> gts;
        for (const PlateAnnotation& plate : gt_frame->plates) {
            gts.push_back(plate.bbox);
        }

        const DetectionMatching matching =
            match_detections(preds, gts, iou_threshold);
        report.true_positives += matching.true_positives;
        report.false_positives += matching.false_positives;
        report.false_negatives += matching.false_negatives;

        // Recognition is scored per ground-truth-recognizable plate. A
        // plate whose matched prediction produced no reading (or that was
        // never matched) counts as fully unread: every character missing.
        std::vector<const ReadingRecord*> gt_reading(gts.size(), nullptr);
        for (std::size_t p = 0; p < preds.size(); ++p) {
            if (matching.pred_to_gt[p] && pred_reading[p] != nullptr) {
                gt_reading[*matching.pred_to_gt[p]] = pred_reading[p];
            }
        }
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const PlateAnnotation& plate = gt_frame->plates[g];
            if (!plate.recognizable) continue;
            const std::string& truth = *plate.plate_string;
            const std::size_t errors =
                gt_reading[g] != nullptr
                    ? char_errors(gt_reading[g]->final_string, truth)
                    : truth.size();
            count_plate(report.recognition, errors);
            count_plate(plate.lines == 1 ? report.single_line
                                         : report.double_line,
                        errors);
        }
    }
    return report;
}

std::string render_report(const EvalReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    out << "Detection: precision "
        << report.precision() * 100.0 << "% (TP " << report.true_positives
        << ", FP " << report.false_positives << ", FN "
        << report.false_negatives << ")\n\n";

    out << "Lines     Total   Exact        <=1 wrong    <=2 wrong\n";
    const auto row = [&](const char* label, const RecognitionCounts& c) {
        out << std::left << std::setw(10) << label << std::right
            << std::setw(5) << c.total << std::setw(8) << c.exact_correct
            << " (" << std::setw(5) << c.accuracy() * 100.0 << "%)"
            << std::setw(6) << c.within_1 << " (" << std::setw(5)
            << c.accuracy_1() * 100.0 << "%)" << std::setw(6) << c.within_2
            << " (" << std::setw(5) << c.accuracy_2() * 100.0 << "%)\n";
    };
    row("single", report.single_line);
    row("double", report.double_line);
    row("total", report.recognition);
    return out.str();
}

} // namespace alpr
