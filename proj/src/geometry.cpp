#include "alpr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "alpr/errors.hpp"

namespace alpr {

BBox::BBox(double x1, double y1, double x2, double y2, double score,
           int class_id)
    : x1_(x1), y1_(y1), x2_(x2), y2_(y2), score_(score), class_id_(class_id) {
    if (!(x1 < x2) || !(y1 < y2)) {
        std::ostringstream msg;
        msg << "BBox requires x1 < x2 and y1 < y2, got (" << x1 << ", " << y1
            << ", " << x2 << ", " << y2 << ")";
        throw ContractViolation(msg.str());
    }
    if (!(score >= 0.0 && score <= 1.0)) {
        std::ostringstream msg;
        msg << "BBox score must be in [0, 1], got " << score;
        throw ContractViolation(msg.str());
    }
}

BBox BBox::translated(double dx, double dy) const {
    return BBox(x1_ + dx, y1_ + dy, x2_ + dx, y2_ + dy, score_, class_id_);
}

double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

namespace {

// Deterministic visit order: score descending, ties by lower x1, lower y1,
// then input order.
std::vector<std::size_t> suppression_order(std::span<const BBox> dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const BBox& da = dets[a];
        const BBox& db = dets[b];
        if (da.score() != db.score()) return da.score() > db.score();
        if (da.x1() != db.x1()) return da.x1() < db.x1();
        if (da.y1() != db.y1()) return da.y1() < db.y1();
        return a < b;
    });
    return order;
}

// Greedy pass, class-blind. Returns indices of kept boxes in visit order.
std::vector<std::size_t> greedy_suppress(std::span<const BBox> dets,
                                         double iou_threshold) {
    std::vector<std::size_t> kept;
    for (std::size_t idx : suppression_order(dets)) {
        bool keep = true;
        for (std::size_t k : kept) {
            if (iou(dets[idx], dets[k]) >= iou_threshold) {
                keep = false;
                break;
            }
        }
        if (keep) kept.push_back(idx);
    }
    return kept;
}

void check_threshold(double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        std::ostringstream msg;
        msg << "NMS iou_threshold must be in (0, 1], got " << iou_threshold;
        throw ContractViolation(msg.str());
    }
}

} // namespace

std::vector<std::size_t> nms_indices(std::span<const BBox> dets,
                                     double iou_threshold) {
    check_threshold(iou_threshold);
    for (const BBox& d : dets) {
        if (d.class_id() != dets.front().class_id()) {
            throw ContractViolation(
                "nms expects a single-class detection list; use batched_nms "
                "for mixed classes");
        }
    }
    return greedy_suppress(dets, iou_threshold);
}

std::vector<BBox> nms(std::span<const BBox> dets, double iou_threshold) {
    std::vector<BBox> out;
    for (std::size_t idx : nms_indices(dets, iou_threshold)) {
        out.push_back(dets[idx]);
    }
    return out;
}

std::vector<TaggedBox> batched_nms(std::span<const TaggedBox> dets,
                                   double iou_threshold) {
    check_threshold(iou_threshold);
    if (dets.empty()) return {};

    // Assign each (frame, class) group an index and find the coordinate
    // extent of the whole batch.
    std::map<std::pair<std::int64_t, int>, std::size_t> group_index;
    double lo = dets.front().box.x1();
    double hi = dets.front().box.x2();
    for (const TaggedBox& d : dets) {
        group_index.emplace(std::pair{d.frame_id, d.box.class_id()},
                            group_index.size());
        lo = std::min({lo, d.box.x1(), d.box.y1()});
        hi = std::max({hi, d.box.x2(), d.box.y2()});
    }

    // Offset stride = global max coordinate + 1, after shifting any
    // negative coordinates up to zero, so group regions cannot overlap.
    const double shift = -std::min(lo, 0.0);
    const double stride = hi + shift + 1.0;

    std::vector<BBox> offset_boxes;
    offset_boxes.reserve(dets.size());
    for (const TaggedBox& d : dets) {
        const auto g = static_cast<double>(
            group_index.at({d.frame_id, d.box.class_id()}));
        offset_boxes.push_back(d.box.translated(g * stride + shift,
                                                g * stride + shift));
    }

    std::vector<TaggedBox> out;
    for (std::size_t idx : greedy_suppress(offset_boxes, iou_threshold)) {
        out.push_back(dets[idx]);
    }
    return out;
}

} // namespace alpr
