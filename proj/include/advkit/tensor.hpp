#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace advkit {

// Dense row-major tensor of doubles. All numeric state in the toolkit
// (images, gradients, logits, perturbations) uses 64-bit floats.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), data(numel(shape), 0.0) {}

    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel(shape)) {
            throw std::invalid_argument(
                "tensor: data length " + std::to_string(data.size()) +
                " does not match shape product " + std::to_string(numel(shape)));
        }
        for (double v : data) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("tensor: non-finite element");
            }
        }
    }

    static std::size_t numel(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t e : s) {
            if (e == 0) {
                throw std::invalid_argument("tensor: zero extent in shape");
            }
            n *= e;
        }
        return n;
    }

    // Internal fast path: callers guarantee the length matches the shape.
    // Skips the finiteness scan so diverged model states can still flow to
    // the diagnostics that report them.
    static Tensor unchecked(std::vector<std::size_t> s, std::vector<double> d) {
        Tensor t;
        t.shape = std::move(s);
        t.data = std::move(d);
        return t;
    }

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}

// Componentwise sign with sign(0) = 0.
inline Tensor sign(const Tensor& t) {
    Tensor out(t.shape);
    for (std::size_t i = 0; i < t.size(); ++i) {
        out[i] = t[i] > 0.0 ? 1.0 : (t[i] < 0.0 ? -1.0 : 0.0);
    }
    return out;
}

inline double l1_norm(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data) s += std::fabs(v);
    return s;
}

inline double linf_norm(const Tensor& t) {
    double m = 0.0;
    for (double v : t.data) m = std::max(m, std::fabs(v));
    return m;
}

inline Tensor clamp(const Tensor& t, double lo, double hi) {
    if (lo > hi) {
        throw std::invalid_argument("clamp: lo > hi");
    }
    Tensor out(t.shape);
    for (std::size_t i = 0; i < t.size(); ++i) {
        out[i] = std::min(std::max(t[i], lo), hi);
    }
    return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Tensor scale(const Tensor& a, double s) {
    Tensor out(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

// IID uniform draws in [lo, hi], one per element in row-major order.
inline Tensor uniform_noise(const std::vector<std::size_t>& shape,
                            double lo, double hi, Rng& rng) {
    if (lo > hi) {
        throw std::invalid_argument("uniform_noise: lo > hi");
    }
    Tensor out(shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(lo, hi);
    return out;
}

} // namespace advkit
