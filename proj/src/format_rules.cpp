#include "alpr/format_rules.hpp"

#include <algorithm>
#include <sstream>

#include "alpr/errors.hpp"

namespace alpr {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_letter(char c) { return c >= 'A' && c <= 'Z'; }

char digit_to_letter(char c) {
    for (const auto& [from, to] : kDigitToLetter) {
        if (from == c) return to;
    }
    return c;
}

char letter_to_digit(char c) {
    for (const auto& [from, to] : kLetterToDigit) {
        if (from == c) return to;
    }
    return c;
}

} // namespace

PlateLayout PlateLayout::make(char vehicle_class, std::string alpha_series,
                              std::string numeric_series,
                              char checksum_letter) {
    std::ostringstream msg;
    if (!is_letter(vehicle_class)) {
        msg << "vehicle class must be a letter, got '" << vehicle_class << "'";
        throw ContractViolation(msg.str());
    }
    if (alpha_series.size() > 2 ||
        !std::all_of(alpha_series.begin(), alpha_series.end(), is_letter)) {
        msg << "alphabetical series must be 0-2 letters, got \"" << alpha_series
            << "\"";
        throw ContractViolation(msg.str());
    }
    if (numeric_series.empty() || numeric_series.size() > 4 ||
        !std::all_of(numeric_series.begin(), numeric_series.end(), is_digit)) {
        msg << "numerical series must be 1-4 digits, got \"" << numeric_series
            << "\"";
        throw ContractViolation(msg.str());
    }
    if (!is_letter(checksum_letter)) {
        msg << "checksum letter must be a letter, got '" << checksum_letter
            << "'";
        throw ContractViolation(msg.str());
    }
    return PlateLayout{vehicle_class, std::move(alpha_series),
                       std::move(numeric_series), checksum_letter};
}

std::string PlateLayout::to_string() const {
    std::string s;
    s.push_back(vehicle_class);
    s += alpha_series;
    s += numeric_series;
    s.push_back(checksum_letter);
    return s;
}

std::vector<Partition> partition(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (len < 3 || len > 8) return {};

    std::vector<Partition> candidates;
    for (int prefix = 1; prefix <= 3; ++prefix) {
        const int digits = len - prefix - 1;
        if (digits < 1 || digits > 4) continue;

        int score = 0;
        for (int i = 0; i < len; ++i) {
            const bool wants_digit = i >= prefix && i < prefix + digits;
            if (wants_digit ? is_digit(s[i]) : is_letter(s[i])) ++score;
        }
        candidates.push_back(Partition{prefix, digits, score});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Partition& a, const Partition& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.digit_len > b.digit_len;
              });
    return candidates;
}

CorrectionResult correct(std::string_view s, bool apply_heuristics) {
    CorrectionResult result;
    result.corrected = std::string(s);

    const std::vector<Partition> candidates = partition(s);
    if (candidates.empty()) {
        return result; // unpartitionable: returned as-is, invalid
    }
    const Partition best = candidates.front();
    const int len = static_cast<int>(s.size());

    bool all_slots_conform = true;
    for (int i = 0; i < len; ++i) {
        const bool wants_digit = i >= best.prefix_len &&
                                 i < best.prefix_len + best.digit_len;
        char& c = result.corrected[static_cast<std::size_t>(i)];
        if (apply_heuristics) {
            const char rewritten = wants_digit ? letter_to_digit(c)
                                               : digit_to_letter(c);
            if (rewritten != c) {
                result.changes.push_back(
                    CharChange{static_cast<std::size_t>(i), c, rewritten});
                c = rewritten;
            }
        }
        if (wants_digit ? !is_digit(c) : !is_letter(c)) {
            all_slots_conform = false;
        }
    }

    if (all_slots_conform) {
        PlateLayout layout = PlateLayout::make(
            result.corrected.front(),
            result.corrected.substr(1, static_cast<std::size_t>(best.prefix_len) - 1),
            result.corrected.substr(static_cast<std::size_t>(best.prefix_len),
                                    static_cast<std::size_t>(best.digit_len)),
            result.corrected.back());
        result.valid = validate(layout).valid;
        result.layout = std::move(layout);
    }
    return result;
}

LayoutCheck validate(const PlateLayout& layout) {
    LayoutCheck check;
    for (char c : layout.alpha_series) {
        if (std::find(kAlphaSeriesExcluded.begin(), kAlphaSeriesExcluded.end(),
                      c) != kAlphaSeriesExcluded.end()) {
            std::ostringstream msg;
            msg << "alphabetical series contains '" << c
                << "' (I and O are never used)";
            check.violations.push_back(msg.str());
        }
    }
    if (std::find(kChecksumExcluded.begin(), kChecksumExcluded.end(),
                  layout.checksum_letter) != kChecksumExcluded.end()) {
        std::ostringstream msg;
        msg << "checksum letter '" << layout.checksum_letter
            << "' is in the excluded set {F, I, N, O, Q, V, W}";
        check.violations.push_back(msg.str());
    }
    check.valid = check.violations.empty();
    return check;
}

} // namespace alpr
