#include "alpr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "alpr/arrangement.hpp"
#include "alpr/errors.hpp"
#include "alpr/grid_decode.hpp"

namespace alpr {

namespace {

constexpr const char* kLetters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
constexpr const char* kDigits = "0123456789";

int rand_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double rand_real(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

char rand_letter(std::mt19937_64& rng, std::string_view exclude) {
    while (true) {
        const char c = kLetters[rand_int(rng, 0, 25)];
        if (exclude.find(c) == std::string_view::npos) return c;
    }
}

double logit(double p) { return std::log(p / (1.0 - p)); }

} // namespace

PlateLayout random_layout(std::mt19937_64& rng) {
    PlateLayout layout;
    layout.vehicle_class = rand_letter(rng, "");
    const int alpha_len = rand_int(rng, 0, 2);
    layout.alpha_series.clear();
    for (int i = 0; i < alpha_len; ++i) {
        layout.alpha_series.push_back(rand_letter(rng, "IO"));
    }
    const int digit_len = rand_int(rng, 1, 4);
    layout.numeric_series.clear();
    for (int i = 0; i < digit_len; ++i) {
        layout.numeric_series.push_back(kDigits[rand_int(rng, 0, 9)]);
    }
    layout.checksum_letter = rand_letter(rng, "FINOQVW");
    return layout;
}

std::string inject_confusions(const std::string& plate, int count,
                              std::mt19937_64& rng) {
    if (count <= 0) return plate;

    // The recognizer can only mistake a character for one that maps back
    // to it through the correction tables, so confusable alternatives are
    // the preimages of those tables.
    const auto alternatives = [&](std::size_t pos) {
        std::string alts;
        const char c = plate[pos];
        const bool digit_slot = c >= '0' && c <= '9';
        if (digit_slot) {
            for (const auto& [letter, digit] : kLetterToDigit) {
                if (digit == c) alts.push_back(letter);
            }
        } else {
            for (const auto& [digit, letter] : kDigitToLetter) {
                if (letter == c) alts.push_back(digit);
            }
        }
        return alts;
    };

    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < plate.size(); ++i) {
        if (!alternatives(i).empty()) usable.push_back(i);
    }

    for (int want = std::min<int>(count, static_cast<int>(usable.size()));
         want > 0; --want) {
        for (int attempt = 0; attempt < 32; ++attempt) {
            std::vector<std::size_t> picks = usable;
            std::shuffle(picks.begin(), picks.end(), rng);
            picks.resize(static_cast<std::size_t>(want));

            std::string corrupted = plate;
            for (std::size_t pos : picks) {
                const std::string alts = alternatives(pos);
                corrupted[pos] =
                    alts[static_cast<std::size_t>(rand_int(
                        rng, 0, static_cast<int>(alts.size()) - 1))];
            }
            const CorrectionResult fixed = correct(corrupted);
            if (fixed.valid && fixed.corrected == plate) {
                return corrupted;
            }
        }
    }
    return plate;
}

namespace {

struct RenderedPlate {
    double crop_w = 0.0;
    double crop_h = 0.0;
    std::vector<CharDetection> chars; // crop coordinates, spelling order
};

// Lay out the characters of `text` on one or two lines inside a fresh
// crop, sized so the line rules land on the intended category with margin.
RenderedPlate render_chars(const std::string& text, int lines,
                           std::mt19937_64& rng) {
    RenderedPlate plate;

    const auto lay_line = [&](const std::string& s, double y, double char_h) {
        double x = rand_real(rng, 6.0, 10.0);
        double max_x = x;
        for (char c : s) {
            const double char_w = rand_real(rng, 12.0, 22.0);
            const double jitter = rand_real(rng, -1.5, 1.5);
            plate.chars.push_back(CharDetection{
                BBox(x, y + jitter, x + char_w, y + jitter + char_h,
                     rand_real(rng, 0.6, 0.99),
                     symbol_to_class(c))});
            x += char_w + rand_real(rng, 4.0, 10.0);
            max_x = x;
        }
        return max_x;
    };

    if (lines == 1) {
        plate.crop_h = rand_real(rng, 55.0, 110.0);
        const double char_h = plate.crop_h * 0.5;
        const double y = plate.crop_h * 0.25;
        const double extent = lay_line(text, y, char_h);
        // Wide enough that the y jitter stays far below the split
        // threshold of 0.3 * width.
        plate.crop_w = std::max(extent + 6.0, 60.0);
    } else {
        plate.crop_h = rand_real(rng, 100.0, 160.0);
        const double char_h = plate.crop_h * 0.3;
        // First line carries the letter prefix, second line the digits
        // and checksum; a length-3 plate splits 1/2.
        const std::size_t split = text.size() > 5 ? text.size() - 5 : 1;
        const double y1 = plate.crop_h * 0.05;
        const double y2 = plate.crop_h * 0.55;
        const double e1 = lay_line(text.substr(0, split), y1, char_h);
        const double e2 = lay_line(text.substr(split), y2, char_h);
        const double extent = std::max(e1, e2);
        // Keep width within 1.5 * height so the y spread (0.5 * height)
        // clears the 0.3 * width double-line threshold.
        plate.crop_w = std::min(std::max({extent + 6.0, plate.crop_h}),
                                plate.crop_h * 1.5);
        if (plate.crop_w < extent + 4.0) {
            // Rescale x coordinates into the clamped width.
            const double scale = (plate.crop_w - 4.0) / extent;
            for (CharDetection& det : plate.chars) {
                det.bbox = BBox(det.bbox.x1() * scale, det.bbox.y1(),
                                det.bbox.x2() * scale, det.bbox.y2(),
                                det.confidence(), det.class_id());
            }
        }
    }
    return plate;
}

// Encode crop-space character boxes into a grid tensor whose decode
// reproduces them (up to float rounding) in network space.
GridTensor encode_tensor(const RenderedPlate& plate) {
    const std::size_t n = static_cast<std::size_t>(kGridWidthCells) *
                          kGridHeightCells * kGridChannels;
    std::vector<double> values(n, 0.0);
    GridTensor tensor(kGridWidthCells, kGridHeightCells, kGridChannels,
                      std::move(values));
    for (int row = 0; row < kGridHeightCells; ++row) {
        for (int col = 0; col < kGridWidthCells; ++col) {
            tensor.at(col, row, kChObjectness) = -12.0;
        }
    }

    const double sx = kCropInputWidth / plate.crop_w;
    const double sy = kCropInputHeight / plate.crop_h;
    for (const CharDetection& det : plate.chars) {
        const double cx = (det.bbox.x1() + det.bbox.x2()) / 2.0 * sx;
        const double cy = (det.bbox.y1() + det.bbox.y2()) / 2.0 * sy;
        const double w = det.bbox.width() * sx;
        const double h = det.bbox.height() * sy;

        const int col = std::min(kGridWidthCells - 1,
                                 static_cast<int>(cx / kGridStride));
        const int row = std::min(kGridHeightCells - 1,
                                 static_cast<int>(cy / kGridStride));
        const double fx =
            std::clamp(cx / kGridStride - col, 0.05, 0.95);
        const double fy =
            std::clamp(cy / kGridStride - row, 0.05, 0.95);

        tensor.at(col, row, kChObjectness) = logit(det.confidence());
        tensor.at(col, row, kChTx) = logit(fx);
        tensor.at(col, row, kChTy) = logit(fy);
        tensor.at(col, row, kChTw) = std::log(w / kGridStride);
        tensor.at(col, row, kChTh) = std::log(h / kGridStride);
        for (int c = 0; c < kNumCharClasses; ++c) {
            tensor.at(col, row, kChClassBase + c) =
                c == det.class_id() ? 8.0 : -8.0;
        }
    }
    return tensor;
}

} // namespace

SyntheticCorpus make_corpus(const SyntheticOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    SyntheticCorpus corpus;

    // Non-overlapping placement slots so detection NMS never merges two
    // real plates.
    constexpr double kSlotW = 480.0;
    constexpr double kSlotH = 180.0;
    const int slot_cols = std::max(1, static_cast<int>(opts.frame_width / kSlotW));
    const int slot_rows = std::max(1, static_cast<int>(opts.frame_height / kSlotH));
    const int total_slots = slot_cols * slot_rows;

    for (std::size_t f = 0; f < opts.frames; ++f) {
        const auto frame_id = static_cast<std::int64_t>(f);

        FrameAnnotation ann_frame;
        ann_frame.frame_id = frame_id;
        {
            std::ostringstream ts;
            ts << "2017-12-01T" << std::setw(2) << std::setfill('0')
               << (f / 3600) % 24 << ":" << std::setw(2) << (f / 60) % 60
               << ":" << std::setw(2) << f % 60;
            ann_frame.timestamp = ts.str();
        }
        ann_frame.split = "synthetic";
        ann_frame.width = opts.frame_width;
        ann_frame.height = opts.frame_height;

        FramePlateFixtures fix_frame;
        fix_frame.frame_id = frame_id;

        const int plate_count = std::min(
            total_slots, rand_int(rng, 0, opts.max_plates_per_frame));
        std::vector<int> slots(static_cast<std::size_t>(total_slots));
        std::iota(slots.begin(), slots.end(), 0);
        std::shuffle(slots.begin(), slots.end(), rng);

        for (int p = 0; p < plate_count; ++p) {
            std::ostringstream crop_id;
            crop_id << frame_id << ":" << p;

            const bool sub_min = rand_real(rng, 0.0, 1.0) < opts.sub_min_rate;
            const int lines = rand_int(rng, 1, 2);
            const PlateLayout layout = random_layout(rng);
            const std::string truth = layout.to_string();

            double crop_w;
            double crop_h;
            RenderedPlate rendered;
            if (sub_min) {
                // At least one side below the filter threshold.
                crop_w = rand_real(rng, 20.0, opts.min_plate_px - 1.0);
                crop_h = rand_real(rng, 20.0, opts.min_plate_px - 1.0);
                if (rand_int(rng, 0, 2) == 0) crop_w += opts.min_plate_px;
            } else {
                const std::string seen = inject_confusions(
                    truth, rand_int(rng, 0, opts.max_confusions), rng);
                rendered = render_chars(seen, lines, rng);
                crop_w = rendered.crop_w;
                crop_h = rendered.crop_h;
            }

            const int slot = slots[static_cast<std::size_t>(p)];
            const double slot_x = (slot % slot_cols) * kSlotW;
            const double slot_y = (slot / slot_cols) * kSlotH;
            const double x0 =
                slot_x + rand_real(rng, 2.0, std::max(3.0, kSlotW - crop_w - 4.0));
            const double y0 =
                slot_y + rand_real(rng, 2.0, std::max(3.0, kSlotH - crop_h - 4.0));
            const BBox plate_box(x0, y0, x0 + crop_w, y0 + crop_h,
                                 rand_real(rng, 0.5, 0.99), 0);

            PlateAnnotation ann{plate_box};
            ann.lines = lines;
            ann.recognizable = !sub_min;
            if (!sub_min) ann.plate_string = truth;
            ann_frame.plates.push_back(std::move(ann));

            fix_frame.detections.push_back(
                PlateDetectionFixture{crop_id.str(), plate_box});

            if (rand_real(rng, 0.0, 1.0) < opts.duplicate_rate) {
                // Near-duplicate the detector would emit; suppressed by NMS.
                const double dx = rand_real(rng, 1.0, crop_w * 0.05);
                std::ostringstream dup_id;
                dup_id << crop_id.str() << ":dup";
                fix_frame.detections.push_back(PlateDetectionFixture{
                    dup_id.str(),
                    BBox(x0 + dx, y0, x0 + dx + crop_w, y0 + crop_h,
                         std::max(0.01, plate_box.score() - 0.1), 0)});
            }

            if (sub_min) continue;

            if (rand_real(rng, 0.0, 1.0) < opts.tensor_rate) {
                corpus.fixtures.char_tensors.push_back(
                    CharTensorFixture{crop_id.str(), encode_tensor(rendered)});
            } else {
                CharListFixture chars;
                chars.crop_id = crop_id.str();
                if (rand_real(rng, 0.0, 1.0) < opts.frame_coords_rate) {
                    chars.coords = CharCoordSpace::Frame;
                    for (const CharDetection& det : rendered.chars) {
                        chars.chars.push_back(
                            CharDetection{det.bbox.translated(x0, y0)});
                    }
                } else {
                    chars.coords = CharCoordSpace::Crop;
                    chars.chars = rendered.chars;
                }
                corpus.fixtures.char_lists.push_back(std::move(chars));
            }
        }

        corpus.annotations.frames.push_back(std::move(ann_frame));
        corpus.fixtures.plate_detections.push_back(std::move(fix_frame));
    }
    return corpus;
}

} // namespace alpr
