#include "alpr/arrangement.hpp"

#include <algorithm>
#include <sstream>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

void check_inputs(const std::vector<CharDetection>& chars, double crop_width) {
    if (chars.empty()) {
        throw ArrangementError("cannot arrange an empty character list");
    }
    if (!(crop_width > 0.0)) {
        std::ostringstream msg;
        msg << "crop width must be positive, got " << crop_width;
        throw ContractViolation(msg.str());
    }
}

// Reading order within a line: ascending x, ties by ascending y, then
// descending confidence, then class id so the order is total.
bool reading_order(const CharDetection& a, const CharDetection& b) {
    if (a.bbox.x1() != b.bbox.x1()) return a.bbox.x1() < b.bbox.x1();
    if (a.bbox.y1() != b.bbox.y1()) return a.bbox.y1() < b.bbox.y1();
    if (a.confidence() != b.confidence()) return a.confidence() > b.confidence();
    return a.class_id() < b.class_id();
}

} // namespace

LineCategory categorize(const std::vector<CharDetection>& chars,
                        double crop_width) {
    check_inputs(chars, crop_width);
    double y_min = chars.front().bbox.y1();
    double y_max = y_min;
    for (const CharDetection& c : chars) {
        y_min = std::min(y_min, c.bbox.y1());
        y_max = std::max(y_max, c.bbox.y1());
    }
    return (y_max - y_min) < crop_width * kLineSplitFactor
               ? LineCategory::SingleLine
               : LineCategory::DoubleLine;
}

std::pair<std::vector<CharDetection>, std::vector<CharDetection>>
split_lines(const std::vector<CharDetection>& chars, double crop_width) {
    check_inputs(chars, crop_width);
    const double threshold = crop_width * kLineSplitFactor;
    std::pair<std::vector<CharDetection>, std::vector<CharDetection>> lines;
    for (const CharDetection& c : chars) {
        if (c.bbox.y1() < threshold) {
            lines.first.push_back(c);
        } else {
            lines.second.push_back(c);
        }
    }
    return lines;
}

ArrangedPlate arrange(const std::vector<CharDetection>& chars,
                      double crop_width) {
    check_inputs(chars, crop_width);

    ArrangedPlate plate;
    plate.category = categorize(chars, crop_width);

    std::vector<CharDetection> ordered;
    if (plate.category == LineCategory::SingleLine) {
        ordered = chars;
        std::sort(ordered.begin(), ordered.end(), reading_order);
    } else {
        auto [first_line, second_line] = split_lines(chars, crop_width);
        std::sort(first_line.begin(), first_line.end(), reading_order);
        std::sort(second_line.begin(), second_line.end(), reading_order);
        ordered = std::move(first_line);
        ordered.insert(ordered.end(), second_line.begin(), second_line.end());
    }

    plate.ordered_chars.reserve(ordered.size());
    for (const CharDetection& c : ordered) {
        const char symbol = c.symbol();
        plate.ordered_chars.emplace_back(symbol, c);
        plate.raw_string.push_back(symbol);
    }
    return plate;
}

} // namespace alpr
