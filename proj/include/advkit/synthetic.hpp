#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace advkit {

// Gaussian class blobs in [0, 1]^dims. Class centers sit on a deterministic
// ring (a line for dims == 1) with adjacent centers `separation` apart in
// units of the within-class standard deviation, so separation ~ 6 gives a
// comfortably linearly separable problem. Labels are assigned round-robin.
// Prefix-stable: the first k examples of synthetic_blobs(n, ...) equal
// synthetic_blobs(k, ...) for k <= n.
inline Dataset synthetic_blobs(std::size_t n, std::size_t dims, std::size_t num_classes,
                               double separation, std::uint64_t seed) {
    if (dims == 0 || num_classes == 0) {
        throw std::invalid_argument("synthetic_blobs: dims and num_classes must be >= 1");
    }
    if (!(separation >= 0.0)) {
        throw std::invalid_argument("synthetic_blobs: separation must be >= 0");
    }

    std::vector<std::vector<double>> centers(num_classes, std::vector<double>(dims, 0.0));
    if (num_classes > 1) {
        if (dims == 1) {
            for (std::size_t k = 0; k < num_classes; ++k) {
                centers[k][0] = separation * static_cast<double>(k);
            }
        } else {
            double radius = separation /
                (2.0 * std::sin(3.141592653589793238462643383279502884 /
                                static_cast<double>(num_classes)));
            for (std::size_t k = 0; k < num_classes; ++k) {
                double a = 2.0 * 3.141592653589793238462643383279502884 *
                           static_cast<double>(k) / static_cast<double>(num_classes);
                centers[k][0] = radius * std::cos(a);
                centers[k][1] = radius * std::sin(a);
            }
        }
    }

    // Map raw space into [0, 1] with one affine scale for every dimension;
    // +-5 sigma margin keeps essentially all samples off the clamp.
    double lo = 0.0, hi = 0.0;
    for (const auto& c : centers) {
        for (double v : c) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    lo -= 5.0;
    hi += 5.0;
    double inv_span = 1.0 / (hi - lo);

    Rng rng(seed);
    Dataset ds;
    ds.name = "blobs";
    ds.num_classes = num_classes;
    ds.input_shape = {dims};
    ds.examples.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t k = j % num_classes;
        Tensor img({dims});
        for (std::size_t d = 0; d < dims; ++d) {
            double raw = centers[k][d] + rng.normal();
            img[d] = std::min(1.0, std::max(0.0, (raw - lo) * inv_span));
        }
        ds.examples.push_back({std::move(img), static_cast<int>(k)});
    }
    return ds;
}

namespace detail {

// Seven-segment glyph geometry in the unit square (y grows downward).
// Segments: 0 top, 1 upper-right, 2 lower-right, 3 bottom, 4 lower-left,
// 5 upper-left, 6 middle.
struct Segment {
    double x1, y1, x2, y2;
};

inline const std::array<Segment, 7>& seven_segments() {
    static const std::array<Segment, 7> segs = {{
        {0.25, 0.15, 0.75, 0.15},
        {0.75, 0.15, 0.75, 0.50},
        {0.75, 0.50, 0.75, 0.85},
        {0.25, 0.85, 0.75, 0.85},
        {0.25, 0.50, 0.25, 0.85},
        {0.25, 0.15, 0.25, 0.50},
        {0.25, 0.50, 0.75, 0.50},
    }};
    return segs;
}

inline const std::array<std::uint8_t, 10>& digit_segment_masks() {
    // Bit i set means segment i is lit.
    static const std::array<std::uint8_t, 10> masks = {
        0b0111111, // 0
        0b0000110, // 1
        0b1011011, // 2
        0b1001111, // 3
        0b1100110, // 4
        0b1101101, // 5
        0b1111101, // 6
        0b0000111, // 7
        0b1111111, // 8
        0b1101111, // 9
    };
    return masks;
}

inline double segment_distance(double px, double py, const Segment& s) {
    double vx = s.x2 - s.x1, vy = s.y2 - s.y1;
    double wx = px - s.x1, wy = py - s.y1;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? (wx * vx + wy * vy) / len2 : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    double dx = px - (s.x1 + t * vx);
    double dy = py - (s.y1 + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace detail

// Procedural 28x28 digit images: seven-segment strokes with per-example
// random rotation, scale, translation, stroke width, contrast, and additive
// pixel noise. Ten classes, labels round-robin, fully deterministic in the
// seed, prefix-stable like synthetic_blobs. A stand-in for handwritten digit
// data when no IDX files are available.
inline Dataset synthetic_digits(std::size_t n, std::uint64_t seed) {
    constexpr std::size_t kSide = 28;
    Rng rng(seed);
    Dataset ds;
    ds.name = "digits";
    ds.num_classes = 10;
    ds.input_shape = {kSide, kSide};
    ds.examples.reserve(n);

    for (std::size_t j = 0; j < n; ++j) {
        int label = static_cast<int>(j % 10);
        double theta = rng.uniform(-0.25, 0.25);
        double scl = rng.uniform(0.85, 1.15);
        double tx = rng.uniform(-0.08, 0.08);
        double ty = rng.uniform(-0.08, 0.08);
        double width = rng.uniform(0.045, 0.075);
        double contrast = rng.uniform(0.80, 1.0);

        double ct = std::cos(theta) * scl, st = std::sin(theta) * scl;
        auto map_x = [&](double x, double y) { return ct * (x - 0.5) - st * (y - 0.5) + 0.5 + tx; };
        auto map_y = [&](double x, double y) { return st * (x - 0.5) + ct * (y - 0.5) + 0.5 + ty; };

        std::uint8_t mask = detail::digit_segment_masks()[static_cast<std::size_t>(label)];
        std::vector<detail::Segment> segs;
        for (std::size_t s = 0; s < 7; ++s) {
            if ((mask >> s) & 1) {
                const detail::Segment& g = detail::seven_segments()[s];
                segs.push_back({map_x(g.x1, g.y1), map_y(g.x1, g.y1),
                                map_x(g.x2, g.y2), map_y(g.x2, g.y2)});
            }
        }

        Tensor img({kSide, kSide});
        double inv_w2 = 1.0 / (width * width);
        for (std::size_t row = 0; row < kSide; ++row) {
            double py = (static_cast<double>(row) + 0.5) / kSide;
            for (std::size_t col = 0; col < kSide; ++col) {
                double px = (static_cast<double>(col) + 0.5) / kSide;
                double best = 1e9;
                for (const detail::Segment& s : segs) {
                    best = std::min(best, detail::segment_distance(px, py, s));
                }
                double ink = contrast * std::exp(-best * best * inv_w2);
                double noise = rng.uniform(0.0, 0.05);
                img[row * kSide + col] = std::min(1.0, std::max(0.0, ink + noise));
            }
        }
        ds.examples.push_back({std::move(img), label});
    }
    return ds;
}

} // namespace advkit
