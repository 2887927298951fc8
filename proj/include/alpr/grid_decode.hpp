#pragma once

#include <vector>

#include "alpr/geometry.hpp"

namespace alpr {

// Character recognizer output contract: 36x25 cells over a 288x200 input
// (stride 8 in both axes), 40 channels per cell.
inline constexpr int kGridWidthCells = 36;
inline constexpr int kGridHeightCells = 25;
inline constexpr int kGridChannels = 40;
inline constexpr int kNumCharClasses = 35;
inline constexpr double kGridStride = 8.0;
inline constexpr double kCropInputWidth = 288.0;
inline constexpr double kCropInputHeight = 200.0;

// Per-cell channel layout: [objectness, tx, ty, tw, th, 35 class logits].
inline constexpr int kChObjectness = 0;
inline constexpr int kChTx = 1;
inline constexpr int kChTy = 2;
inline constexpr int kChTw = 3;
inline constexpr int kChTh = 4;
inline constexpr int kChClassBase = 5;

/// Raw recognizer output: 36x25x40 logits, row-major cells with the 40
/// channels contiguous per cell. Construction rejects wrong dimensions
/// (ContractViolation) and non-finite values (DecodeError).
class GridTensor {
public:
    GridTensor(int width_cells, int height_cells, int channels,
               std::vector<double> values);

    /// All-default tensor (every logit 0).
    static GridTensor zeros();

    double at(int col, int row, int channel) const {
        return values_[(static_cast<std::size_t>(row) * kGridWidthCells + col) *
                           kGridChannels +
                       channel];
    }
    double& at(int col, int row, int channel) {
        return values_[(static_cast<std::size_t>(row) * kGridWidthCells + col) *
                           kGridChannels +
                       channel];
    }

    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

/// One recognized character in plate-crop pixel coordinates. The embedded
/// box carries the class id and confidence so geometry operations can use
/// it directly.
struct CharDetection {
    BBox bbox;

    int class_id() const { return bbox.class_id(); }
    double confidence() const { return bbox.score(); }
    char symbol() const;

    bool operator==(const CharDetection& other) const = default;
};

/// Decode a grid tensor into character detections:
///   objectness  = sigmoid(ch0)
///   center      = ((col + sigmoid(ch1)) * 8, (row + sigmoid(ch2)) * 8)
///   size        = (exp(ch3) * 8, exp(ch4) * 8)
///   class       = argmax of softmax over ch5..ch39
///   confidence  = objectness * class probability
/// Cells below conf_threshold are dropped, boxes are clamped to the
/// 288x200 input extent, then per-class NMS runs at iou_threshold. Output
/// is sorted by confidence descending. Thresholds must lie in (0, 1).
std::vector<CharDetection> decode_grid(const GridTensor& tensor,
                                       double conf_threshold,
                                       double iou_threshold);

/// The 35-symbol recognizer alphabet: digits 0-9 (class 0 doubles as the
/// letter O), then A-N and P-Z. Out-of-range ids throw ContractViolation.
char class_to_symbol(int class_id);

/// Inverse of class_to_symbol; additionally accepts 'O' as the merged
/// class 0. Any other character throws ContractViolation.
int symbol_to_class(char symbol);

} // namespace alpr
