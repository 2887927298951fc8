#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "alpr/errors.hpp"
#include "alpr/grid_decode.hpp"

using alpr::GridTensor;
using namespace alpr;

namespace {

GridTensor silent_tensor() {
    GridTensor t = GridTensor::zeros();
    for (int row = 0; row < kGridHeightCells; ++row) {
        for (int col = 0; col < kGridWidthCells; ++col) {
            t.at(col, row, kChObjectness) = -10.0;
        }
    }
    return t;
}

void set_hot_cell(GridTensor& t, int col, int row, int class_id,
                  double objectness = 10.0, double tw = 0.0, double th = 0.0) {
    t.at(col, row, kChObjectness) = objectness;
    t.at(col, row, kChTx) = 0.0;
    t.at(col, row, kChTy) = 0.0;
    t.at(col, row, kChTw) = tw;
    t.at(col, row, kChTh) = th;
    for (int c = 0; c < kNumCharClasses; ++c) {
        t.at(col, row, kChClassBase + c) = c == class_id ? 10.0 : -10.0;
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

TEST_CASE("tensor construction enforces dimensions and finiteness") {
    CHECK_THROWS_AS(GridTensor(35, 25, 40, std::vector<double>(35 * 25 * 40)),
                    ContractViolation);
    CHECK_THROWS_AS(GridTensor(36, 25, 40, std::vector<double>(7)),
                    ContractViolation);
    std::vector<double> bad(36 * 25 * 40, 0.0);
    bad[12345] = std::nan("");
    CHECK_THROWS_AS(GridTensor(36, 25, 40, std::move(bad)), DecodeError);
    std::vector<double> inf_values(36 * 25 * 40, 0.0);
    inf_values[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(GridTensor(36, 25, 40, std::move(inf_values)), DecodeError);
}

TEST_CASE("decode rejects out-of-range thresholds") {
    const GridTensor t = silent_tensor();
    CHECK_THROWS_AS(decode_grid(t, 0.0, 0.5), ContractViolation);
    CHECK_THROWS_AS(decode_grid(t, 1.0, 0.5), ContractViolation);
    CHECK_THROWS_AS(decode_grid(t, 0.25, 0.0), ContractViolation);
    CHECK_THROWS_AS(decode_grid(t, 0.25, 1.0), ContractViolation);
}

TEST_CASE("silent tensor decodes to nothing") {
    CHECK(decode_grid(silent_tensor(), 0.25, 0.5).empty());
}

TEST_CASE("single hot cell decodes to the hand-computed detection") {
    GridTensor t = silent_tensor();
    const int k = 27; // 'S'
    set_hot_cell(t, 5, 3, k);

    const auto dets = decode_grid(t, 0.25, 0.5);
    REQUIRE(dets.size() == 1);
    const CharDetection& det = dets[0];
    CHECK(det.class_id() == k);
    CHECK(det.symbol() == 'S');

    // center = ((5 + sigmoid(0)) * 8, (3 + sigmoid(0)) * 8) = (44, 28)
    const double cx = (det.bbox.x1() + det.bbox.x2()) / 2.0;
    const double cy = (det.bbox.y1() + det.bbox.y2()) / 2.0;
    CHECK(cx == doctest::Approx(44.0));
    CHECK(cy == doctest::Approx(28.0));
    // size = (exp(0) * 8, exp(0) * 8)
    CHECK(det.bbox.width() == doctest::Approx(8.0));
    CHECK(det.bbox.height() == doctest::Approx(8.0));

    // confidence = sigmoid(10) * softmax probability of the hot logit
    const double p = std::exp(10.0) /
                     (std::exp(10.0) + 34.0 * std::exp(-10.0));
    CHECK(det.confidence() == doctest::Approx(sigmoid(10.0) * p));
    CHECK(det.confidence() > 0.999);
}

TEST_CASE("adjacent duplicate cells collapse to one detection") {
    GridTensor t = silent_tensor();
    const int k = 4;
    // 32x32 boxes centered 8 px apart overlap at IoU 0.6
    set_hot_cell(t, 5, 3, k, 10.0, std::log(4.0), std::log(4.0));
    set_hot_cell(t, 6, 3, k, 8.0, std::log(4.0), std::log(4.0));

    const auto dets = decode_grid(t, 0.25, 0.5);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].class_id() == k);
    // the higher-objectness cell wins
    const double cx = (dets[0].bbox.x1() + dets[0].bbox.x2()) / 2.0;
    CHECK(cx == doctest::Approx(44.0));
}

TEST_CASE("same-class far cells and different-class overlaps both survive") {
    GridTensor t = silent_tensor();
    set_hot_cell(t, 5, 3, 7);
    set_hot_cell(t, 20, 10, 7);  // same class, far away
    set_hot_cell(t, 6, 3, 9, 10.0, std::log(4.0), std::log(4.0));
    const auto dets = decode_grid(t, 0.25, 0.5);
    CHECK(dets.size() == 3);
}

TEST_CASE("raising the confidence threshold never adds detections") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> logit(-10.0, 10.0);
    for (int round = 0; round < 20; ++round) {
        std::vector<double> values(36 * 25 * 40);
        for (double& v : values) v = logit(rng);
        const GridTensor t(36, 25, 40, std::move(values));

        const auto low = decode_grid(t, 0.25, 0.5);
        const auto high = decode_grid(t, 0.55, 0.5);
        CHECK(low.size() <= 36 * 25);
        CHECK(high.size() <= low.size());

        const auto key = [](const CharDetection& d) {
            return std::tuple(d.bbox.x1(), d.bbox.y1(), d.bbox.x2(),
                              d.bbox.y2(), d.class_id());
        };
        std::set<std::tuple<double, double, double, double, int>> low_set;
        for (const auto& d : low) low_set.insert(key(d));
        for (const auto& d : high) CHECK(low_set.count(key(d)) == 1);

        // output sorted by confidence descending
        for (std::size_t i = 1; i < low.size(); ++i) {
            CHECK(low[i - 1].confidence() >= low[i].confidence());
        }
    }
}

TEST_CASE("decoded centers stay inside their source cell") {
    // Interior cells with sizes small enough that clamping never cuts the
    // box, so the box midpoint is the decode center itself.
    std::mt19937_64 rng(37);
    std::uniform_int_distribution<int> col_dist(2, kGridWidthCells - 3);
    std::uniform_int_distribution<int> row_dist(2, kGridHeightCells - 3);
    std::uniform_real_distribution<double> off(-6.0, 6.0);
    std::uniform_real_distribution<double> size_logit(-1.0, 1.2);
    std::uniform_int_distribution<int> class_dist(0, kNumCharClasses - 1);

    for (int round = 0; round < 200; ++round) {
        GridTensor t = silent_tensor();
        const int col = col_dist(rng);
        const int row = row_dist(rng);
        set_hot_cell(t, col, row, class_dist(rng));
        t.at(col, row, kChTx) = off(rng);
        t.at(col, row, kChTy) = off(rng);
        t.at(col, row, kChTw) = size_logit(rng);
        t.at(col, row, kChTh) = size_logit(rng);

        const auto dets = decode_grid(t, 0.25, 0.5);
        REQUIRE(dets.size() == 1);
        const double cx = (dets[0].bbox.x1() + dets[0].bbox.x2()) / 2.0;
        const double cy = (dets[0].bbox.y1() + dets[0].bbox.y2()) / 2.0;
        CHECK(cx >= col * kGridStride);
        CHECK(cx <= (col + 1) * kGridStride);
        CHECK(cy >= row * kGridStride);
        CHECK(cy <= (row + 1) * kGridStride);
    }
}

TEST_CASE("oversized edge boxes clamp to the input extent") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> col_dist(0, kGridWidthCells - 1);
    std::uniform_int_distribution<int> row_dist(0, kGridHeightCells - 1);
    std::uniform_int_distribution<int> class_dist(0, kNumCharClasses - 1);
    for (int round = 0; round < 100; ++round) {
        GridTensor t = silent_tensor();
        // enormous box: exp(4) * 8 = 437 px, wider than the input
        set_hot_cell(t, col_dist(rng), row_dist(rng), class_dist(rng), 10.0,
                     4.0, 4.0);
        const auto dets = decode_grid(t, 0.25, 0.5);
        REQUIRE(dets.size() == 1);
        CHECK(dets[0].bbox.x1() >= 0.0);
        CHECK(dets[0].bbox.y1() >= 0.0);
        CHECK(dets[0].bbox.x2() <= kCropInputWidth);
        CHECK(dets[0].bbox.y2() <= kCropInputHeight);
    }
}

TEST_CASE("alphabet maps ids to symbols with O merged into 0") {
    CHECK(class_to_symbol(0) == '0');
    CHECK(class_to_symbol(9) == '9');
    CHECK(class_to_symbol(10) == 'A');
    CHECK(class_to_symbol(23) == 'N');
    CHECK(class_to_symbol(24) == 'P'); // O skipped
    CHECK(class_to_symbol(34) == 'Z');
    CHECK_THROWS_AS(class_to_symbol(-1), ContractViolation);
    CHECK_THROWS_AS(class_to_symbol(35), ContractViolation);

    for (int id = 0; id < kNumCharClasses; ++id) {
        CHECK(symbol_to_class(class_to_symbol(id)) == id);
    }
    CHECK(symbol_to_class('O') == 0);
    CHECK_THROWS_AS(symbol_to_class('o'), ContractViolation);
    CHECK_THROWS_AS(symbol_to_class('!'), ContractViolation);
}
