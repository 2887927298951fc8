#include "alpr/grid_decode.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string_view>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

constexpr std::string_view kAlphabet = "0123456789ABCDEFGHIJKLMNPQRSTUVWXYZ";
static_assert(kAlphabet.size() == kNumCharClasses);

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

GridTensor::GridTensor(int width_cells, int height_cells, int channels,
                       std::vector<double> values)
    : values_(std::move(values)) {
    if (width_cells != kGridWidthCells || height_cells != kGridHeightCells ||
        channels != kGridChannels) {
        std::ostringstream msg;
        msg << "grid tensor must be " << kGridWidthCells << "x"
            << kGridHeightCells << "x" << kGridChannels << ", got "
            << width_cells << "x" << height_cells << "x" << channels;
        throw ContractViolation(msg.str());
    }
    const std::size_t expected = static_cast<std::size_t>(kGridWidthCells) *
                                 kGridHeightCells * kGridChannels;
    if (values_.size() != expected) {
        std::ostringstream msg;
        msg << "grid tensor expects " << expected << " values, got "
            << values_.size();
        throw ContractViolation(msg.str());
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            std::ostringstream msg;
            msg << "grid tensor value at flat index " << i << " is not finite";
            throw DecodeError(msg.str());
        }
    }
}

GridTensor GridTensor::zeros() {
    return GridTensor(kGridWidthCells, kGridHeightCells, kGridChannels,
                      std::vector<double>(static_cast<std::size_t>(
                                              kGridWidthCells) *
                                              kGridHeightCells * kGridChannels,
                                          0.0));
}

char CharDetection::symbol() const { return class_to_symbol(class_id()); }

std::vector<CharDetection> decode_grid(const GridTensor& tensor,
                                       double conf_threshold,
                                       double iou_threshold) {
    if (!(conf_threshold > 0.0 && conf_threshold < 1.0) ||
        !(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        std::ostringstream msg;
        msg << "decode thresholds must be in (0, 1), got conf="
            << conf_threshold << " iou=" << iou_threshold;
        throw ContractViolation(msg.str());
    }

    std::vector<CharDetection> candidates;
    for (int row = 0; row < kGridHeightCells; ++row) {
        for (int col = 0; col < kGridWidthCells; ++col) {
            const double objectness = sigmoid(tensor.at(col, row, kChObjectness));
            // Class probability can only lower the confidence, so a cell
            // whose objectness is already below threshold never survives.
            if (objectness < conf_threshold) continue;

            int best_class = 0;
            double max_logit = tensor.at(col, row, kChClassBase);
            for (int c = 1; c < kNumCharClasses; ++c) {
                const double logit = tensor.at(col, row, kChClassBase + c);
                if (logit > max_logit) {
                    max_logit = logit;
                    best_class = c;
                }
            }
            double denom = 0.0;
            for (int c = 0; c < kNumCharClasses; ++c) {
                denom += std::exp(tensor.at(col, row, kChClassBase + c) -
                                  max_logit);
            }
            const double class_prob = 1.0 / denom;

            const double confidence = objectness * class_prob;
            if (confidence < conf_threshold) continue;

            const double cx = (col + sigmoid(tensor.at(col, row, kChTx))) *
                              kGridStride;
            const double cy = (row + sigmoid(tensor.at(col, row, kChTy))) *
                              kGridStride;
            const double w = std::exp(tensor.at(col, row, kChTw)) * kGridStride;
            const double h = std::exp(tensor.at(col, row, kChTh)) * kGridStride;

            // Clamp to the network input extent. The center always lies
            // strictly inside it, so the clamped box keeps positive area.
            const double x1 = std::max(0.0, cx - w / 2.0);
            const double y1 = std::max(0.0, cy - h / 2.0);
            const double x2 = std::min(kCropInputWidth, cx + w / 2.0);
            const double y2 = std::min(kCropInputHeight, cy + h / 2.0);

            candidates.push_back(
                CharDetection{BBox(x1, y1, x2, y2, confidence, best_class)});
        }
    }

    // Per-class NMS, then one global confidence-descending list.
    std::map<int, std::vector<BBox>> by_class;
    for (const CharDetection& det : candidates) {
        by_class[det.class_id()].push_back(det.bbox);
    }
    std::vector<CharDetection> out;
    for (auto& [class_id, boxes] : by_class) {
        for (BBox& kept : nms(boxes, iou_threshold)) {
            out.push_back(CharDetection{kept});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CharDetection& a, const CharDetection& b) {
                  if (a.confidence() != b.confidence())
                      return a.confidence() > b.confidence();
                  if (a.bbox.x1() != b.bbox.x1()) return a.bbox.x1() < b.bbox.x1();
                  if (a.bbox.y1() != b.bbox.y1()) return a.bbox.y1() < b.bbox.y1();
                  return a.class_id() < b.class_id();
              });
    return out;
}

char class_to_symbol(int class_id) {
    if (class_id < 0 || class_id >= kNumCharClasses) {
        std::ostringstream msg;
        msg << "character class id must be in [0, " << kNumCharClasses
            << "), got " << class_id;
        throw ContractViolation(msg.str());
    }
    return kAlphabet[static_cast<std::size_t>(class_id)];
}

int symbol_to_class(char symbol) {
    if (symbol == 'O') return 0; // merged with the digit 0
    const std::size_t pos = kAlphabet.find(symbol);
    if (pos == std::string_view::npos) {
        std::ostringstream msg;
        msg << "'" << symbol << "' is not in the recognizer alphabet";
        throw ContractViolation(msg.str());
    }
    return static_cast<int>(pos);
}

} // namespace alpr
