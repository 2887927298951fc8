#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace alpr {

/// Axis-aligned detection box with score and class label. Coordinates are
/// real-valued pixels (crops may produce fractional boxes). Construction
/// rejects zero-area boxes and out-of-range scores, so every live BBox is
/// valid by definition.
class BBox {
public:
    BBox(double x1, double y1, double x2, double y2, double score = 1.0,
         int class_id = 0);

    double x1() const { return x1_; }
    double y1() const { return y1_; }
    double x2() const { return x2_; }
    double y2() const { return y2_; }
    double score() const { return score_; }
    int class_id() const { return class_id_; }

    double width() const { return x2_ - x1_; }
    double height() const { return y2_ - y1_; }
    double area() const { return width() * height(); }

    /// Same box translated by (dx, dy).
    BBox translated(double dx, double dy) const;

    bool operator==(const BBox& other) const = default;

private:
    double x1_, y1_, x2_, y2_;
    double score_;
    int class_id_;
};

/// Intersection over union. Symmetric, 0 for disjoint or merely touching
/// boxes, 1 for identical ones.
double iou(const BBox& a, const BBox& b);

/// Greedy non-maximum suppression over a single-class detection list.
/// Boxes are visited in descending score order (ties broken by lower x1,
/// then lower y1, then input order); a box is kept iff its IoU with every
/// already-kept box is below the threshold. Output is in visit order, i.e.
/// sorted by descending score. Throws ContractViolation on mixed class ids
/// or a threshold outside (0, 1].
std::vector<BBox> nms(std::span<const BBox> dets, double iou_threshold);

/// nms() variant returning indices into `dets` (in visit order) instead of
/// the boxes themselves, for callers that carry side data per detection.
std::vector<std::size_t> nms_indices(std::span<const BBox> dets,
                                     double iou_threshold);

/// A detection tagged with the frame it came from; the box carries its own
/// class id. batched_nms suppresses only within (frame_id, class_id) groups.
struct TaggedBox {
    std::int64_t frame_id = 0;
    BBox box;

    bool operator==(const TaggedBox& other) const = default;
};

/// Single-pass NMS over detections spanning multiple frames and classes.
/// Each (frame_id, class_id) group is offset into its own disjoint
/// coordinate region so one suppression pass over the whole batch gives a
/// result set-equal to running nms() independently per group.
std::vector<TaggedBox> batched_nms(std::span<const TaggedBox> dets,
                                   double iou_threshold);

} // namespace alpr
