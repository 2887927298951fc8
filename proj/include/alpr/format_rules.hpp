#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace alpr {

/// Four-part Singapore plate layout: one vehicle-class letter, up to two
/// alphabetical-series letters, one to four numerical-series digits, and a
/// checksum letter. Construction enforces the structural shape (lengths
/// and character classes); the letter exclusion rules are checked by
/// validate() so that non-conforming layouts stay representable.
struct PlateLayout {
    char vehicle_class = 'S';
    std::string alpha_series;   // 0-2 letters
    std::string numeric_series; // 1-4 digits
    char checksum_letter = 'A';

    static PlateLayout make(char vehicle_class, std::string alpha_series,
                            std::string numeric_series, char checksum_letter);

    std::string to_string() const;
    std::size_t length() const { return 2 + alpha_series.size() + numeric_series.size(); }

    bool operator==(const PlateLayout& other) const = default;
};

/// Letters that never appear in the alphabetical series.
inline constexpr std::array<char, 2> kAlphaSeriesExcluded = {'I', 'O'};

/// Letters that never appear as the checksum letter.
inline constexpr std::array<char, 7> kChecksumExcluded = {'F', 'I', 'N',
                                                          'O', 'Q', 'V', 'W'};

/// Shape-confusion rewrite applied to digits found in the letter parts
/// (vehicle class, alphabetical series, checksum).
inline constexpr std::array<std::pair<char, char>, 9> kDigitToLetter = {{
    {'5', 'S'},
    {'3', 'S'},
    {'8', 'B'},
    {'7', 'Z'},
    {'2', 'Z'},
    {'4', 'A'},
    {'1', 'T'},
    {'0', 'O'},
    {'6', 'G'},
}};

/// Shape-confusion rewrite applied to letters found in the numerical series.
inline constexpr std::array<std::pair<char, char>, 11> kLetterToDigit = {{
    {'S', '5'},
    {'B', '8'},
    {'Z', '7'},
    {'A', '4'},
    {'I', '1'},
    {'T', '1'},
    {'L', '1'},
    {'D', '0'},
    {'O', '0'},
    {'Q', '0'},
    {'G', '6'},
}};

/// A way of splitting a string of length prefix_len + digit_len + 1 into
/// letter prefix, digit run, and checksum letter. score counts positions
/// whose character class (letter vs digit) already matches the slot.
struct Partition {
    int prefix_len = 0; // vehicle class + alphabetical series, 1-3
    int digit_len = 0;  // numerical series, 1-4
    int score = 0;

    bool operator==(const Partition& other) const = default;
};

/// Enumerate candidate partitions of s, best first. Candidates are scored
/// by class-match count; ties break toward more digits. Strings shorter
/// than 3 or longer than 8 characters have no candidates.
std::vector<Partition> partition(std::string_view s);

struct CharChange {
    std::size_t position = 0;
    char from = '\0';
    char to = '\0';

    bool operator==(const CharChange& other) const = default;
};

struct CorrectionResult {
    std::string corrected;
    std::optional<PlateLayout> layout;
    bool valid = false;
    std::vector<CharChange> changes;
};

/// Pick the best partition of s, rewrite confused characters toward the
/// slot classes (digit->letter in the letter parts, letter->digit in the
/// numerical series), and validate the result. Characters with no table
/// entry stay put and mark the plate invalid. With apply_heuristics false
/// the string is only partitioned and validated, never rewritten.
CorrectionResult correct(std::string_view s, bool apply_heuristics = true);

struct LayoutCheck {
    bool valid = false;
    std::vector<std::string> violations;
};

/// Check the letter exclusion rules: no I/O in the alphabetical series and
/// a checksum letter outside the excluded set.
LayoutCheck validate(const PlateLayout& layout);

} // namespace alpr
