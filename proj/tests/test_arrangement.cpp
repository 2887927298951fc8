#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "alpr/arrangement.hpp"
#include "alpr/errors.hpp"
#include "alpr/grid_decode.hpp"

using namespace alpr;

namespace {

CharDetection ch(char symbol, double x, double y, double conf = 0.9,
                 double w = 18.0, double h = 30.0) {
    return CharDetection{BBox(x, y, x + w, y + h, conf, symbol_to_class(symbol))};
}

} // namespace

TEST_CASE("categorize follows the width-relative spread rule") {
    // zero spread: single regardless of width
    CHECK(categorize({ch('S', 10, 20), ch('B', 40, 20), ch('A', 70, 20)},
                     240.0) == LineCategory::SingleLine);
    // spread 80 >= 200 * 0.3
    CHECK(categorize({ch('S', 10, 10), ch('B', 40, 90)}, 200.0) ==
          LineCategory::DoubleLine);
    // spread 59 < 60: just inside single
    CHECK(categorize({ch('S', 10, 10), ch('B', 40, 69)}, 200.0) ==
          LineCategory::SingleLine);
    // spread exactly at the threshold is double (strict less-than)
    CHECK(categorize({ch('S', 10, 0), ch('B', 40, 60)}, 200.0) ==
          LineCategory::DoubleLine);
}

TEST_CASE("categorize rejects bad input") {
    CHECK_THROWS_AS(categorize({}, 200.0), ArrangementError);
    CHECK_THROWS_AS(categorize({ch('S', 0, 0)}, 0.0), ContractViolation);
    CHECK_THROWS_AS(categorize({ch('S', 0, 0)}, -5.0), ContractViolation);
}

TEST_CASE("split_lines partitions at width * 0.3") {
    const std::vector<CharDetection> chars{
        ch('S', 10, 10), ch('B', 40, 20), ch('1', 5, 110), ch('2', 30, 120)};
    const auto [first, second] = split_lines(chars, 200.0);
    REQUIRE(first.size() == 2);
    REQUIRE(second.size() == 2);
    CHECK(first[0].bbox.y1() == 10.0);
    CHECK(first[1].bbox.y1() == 20.0);
    CHECK(second[0].bbox.y1() == 110.0);
    CHECK(second[1].bbox.y1() == 120.0);

    // everything at or past the threshold lands on the second line
    const auto [none, all] =
        split_lines({ch('S', 0, 60), ch('B', 30, 80)}, 200.0);
    CHECK(none.empty());
    CHECK(all.size() == 2);

    // boundary case: y exactly equal to width * 0.3 goes to the second line
    const auto [top, bottom] =
        split_lines({ch('S', 0, 10), ch('B', 30, 60)}, 200.0);
    CHECK(top.size() == 1);
    CHECK(bottom.size() == 1);
    CHECK(bottom[0].bbox.y1() == 60.0);
}

TEST_CASE("arrange sorts a single line by x") {
    const ArrangedPlate plate =
        arrange({ch('B', 40, 20), ch('S', 10, 20), ch('1', 70, 20)}, 240.0);
    CHECK(plate.category == LineCategory::SingleLine);
    CHECK(plate.raw_string == "SB1");
    REQUIRE(plate.ordered_chars.size() == 3);
    CHECK(plate.ordered_chars[0].first == 'S');
}

TEST_CASE("arrange concatenates first line then second") {
    // first line S(10) B(40); second line 1(5) 2(30); width 100 -> split 30
    const ArrangedPlate plate = arrange(
        {ch('1', 5, 60), ch('S', 10, 5), ch('2', 30, 62), ch('B', 40, 6)},
        100.0);
    CHECK(plate.category == LineCategory::DoubleLine);
    CHECK(plate.raw_string == "SB12");
}

TEST_CASE("arrange of a single character") {
    const ArrangedPlate plate = arrange({ch('Q', 33, 7)}, 200.0);
    CHECK(plate.category == LineCategory::SingleLine);
    CHECK(plate.raw_string == "Q");
}

TEST_CASE("arrange rejects empty input") {
    CHECK_THROWS_AS(arrange({}, 200.0), ArrangementError);
}

TEST_CASE("equal x ties break by y then confidence") {
    // same x: lower y first
    CHECK(arrange({ch('B', 10, 22), ch('A', 10, 2)}, 400.0).raw_string == "AB");
    // same x and y: higher confidence first
    CHECK(arrange({ch('C', 10, 5, 0.5), ch('D', 10, 5, 0.9)}, 400.0)
              .raw_string == "DC");
}

TEST_CASE("arrange is invariant under input permutation") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> count_dist(1, 8);
    std::uniform_int_distribution<int> class_dist(0, kNumCharClasses - 1);
    std::uniform_real_distribution<double> x_dist(0.0, 260.0);
    std::uniform_real_distribution<double> y_dist(0.0, 180.0);
    std::uniform_real_distribution<double> conf(0.3, 1.0);

    for (int round = 0; round < 300; ++round) {
        std::vector<CharDetection> chars;
        const int n = count_dist(rng);
        for (int i = 0; i < n; ++i) {
            chars.push_back(CharDetection{
                BBox(x_dist(rng), y_dist(rng), x_dist(rng) + 270.0,
                     y_dist(rng) + 190.0, conf(rng), class_dist(rng))});
        }
        const double width = 100.0 + x_dist(rng);
        const ArrangedPlate base = arrange(chars, width);
        CHECK(base.ordered_chars.size() == chars.size());
        for (int shuffle_round = 0; shuffle_round < 4; ++shuffle_round) {
            std::shuffle(chars.begin(), chars.end(), rng);
            CHECK(arrange(chars, width).raw_string == base.raw_string);
        }
    }
}

TEST_CASE("single-line output is monotone in x, double-line respects split") {
    std::mt19937_64 rng(47);
    std::uniform_int_distribution<int> count_dist(1, 8);
    std::uniform_int_distribution<int> class_dist(0, kNumCharClasses - 1);
    std::uniform_real_distribution<double> x_dist(0.0, 250.0);
    std::uniform_real_distribution<double> y_dist(0.0, 150.0);

    for (int round = 0; round < 300; ++round) {
        std::vector<CharDetection> chars;
        const int n = count_dist(rng);
        for (int i = 0; i < n; ++i) {
            const double x = x_dist(rng);
            const double y = y_dist(rng);
            chars.push_back(CharDetection{
                BBox(x, y, x + 15.0, y + 25.0, 0.9, class_dist(rng))});
        }
        const double width = 80.0 + x_dist(rng);
        const double threshold = width * kLineSplitFactor;
        const ArrangedPlate plate = arrange(chars, width);

        if (plate.category == LineCategory::SingleLine) {
            for (std::size_t i = 1; i < plate.ordered_chars.size(); ++i) {
                CHECK(plate.ordered_chars[i - 1].second.bbox.x1() <=
                      plate.ordered_chars[i].second.bbox.x1());
            }
        } else {
            const auto [first, second] = split_lines(chars, width);
            for (const CharDetection& det : first) {
                CHECK(det.bbox.y1() < threshold);
            }
            for (const CharDetection& det : second) {
                CHECK(det.bbox.y1() >= threshold);
            }
            CHECK(first.size() + second.size() == chars.size());
        }
    }
}

TEST_CASE("categorize is invariant under uniform scaling") {
    std::mt19937_64 rng(53);
    std::uniform_int_distribution<int> count_dist(1, 8);
    std::uniform_real_distribution<double> y_dist(0.0, 150.0);

    for (int round = 0; round < 200; ++round) {
        std::vector<CharDetection> chars;
        const int n = count_dist(rng);
        for (int i = 0; i < n; ++i) {
            const double y = y_dist(rng);
            chars.push_back(
                CharDetection{BBox(10.0 * i + 1.0, y, 10.0 * i + 9.0, y + 20.0,
                                   0.9, 0)});
        }
        const double width = 60.0 + y_dist(rng);
        const LineCategory base = categorize(chars, width);
        for (const double factor : {0.5, 2.0, 4.0}) { // exact in binary fp
            std::vector<CharDetection> scaled;
            for (const CharDetection& det : chars) {
                scaled.push_back(CharDetection{
                    BBox(det.bbox.x1(), det.bbox.y1() * factor, det.bbox.x2(),
                         det.bbox.y2() * factor, 0.9, 0)});
            }
            CHECK(categorize(scaled, width * factor) == base);
        }
    }
}
