#pragma once

#include <string>
#include <utility>
#include <vector>

#include "alpr/grid_decode.hpp"

namespace alpr {

enum class LineCategory {
    SingleLine,
    DoubleLine,
};

/// Fraction of the crop width that bounds the top-left-y spread of a
/// single-line plate, and that splits a double-line plate into lines.
inline constexpr double kLineSplitFactor = 0.3;

/// Characters in reading order with the category that produced the order.
struct ArrangedPlate {
    LineCategory category = LineCategory::SingleLine;
    std::vector<std::pair<char, CharDetection>> ordered_chars;
    std::string raw_string;
};

/// Single line iff the spread of top-left y coordinates is strictly less
/// than crop_width * 0.3. Throws ArrangementError on an empty character
/// list, ContractViolation on a non-positive crop width.
LineCategory categorize(const std::vector<CharDetection>& chars,
                        double crop_width);

/// Partition characters of a double-line plate: a character joins the
/// first line iff its top-left y is strictly below crop_width * 0.3,
/// otherwise the second line.
std::pair<std::vector<CharDetection>, std::vector<CharDetection>>
split_lines(const std::vector<CharDetection>& chars, double crop_width);

/// Categorize, order by ascending x within each line (first line before
/// second for double-line plates), and render the character string. Ties
/// on x break by ascending y, then descending confidence.
ArrangedPlate arrange(const std::vector<CharDetection>& chars,
                      double crop_width);

} // namespace alpr
