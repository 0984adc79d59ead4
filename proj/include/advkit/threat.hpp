#pragma once

#include <stdexcept>

#include "tensor.hpp"

namespace advkit {

// L-infinity threat model: perturbations live in the eps-ball around the
// original input, intersected with the valid pixel box.
struct ThreatModel {
    double epsilon = 0.0;
    double pixel_lo = 0.0;
    double pixel_hi = 1.0;

    void validate() const {
        if (!(epsilon >= 0.0)) {
            throw std::invalid_argument("threat model: epsilon must be >= 0");
        }
        if (!(pixel_lo <= pixel_hi)) {
            throw std::invalid_argument("threat model: pixel_lo > pixel_hi");
        }
    }
};

// Componentwise projection: clamp to [orig - eps, orig + eps], then to the
// pixel box. A single pass, so the result satisfies both constraints exactly
// whenever orig itself lies in the pixel box. Idempotent.
inline Tensor project(const Tensor& cand, const Tensor& orig, const ThreatModel& tm) {
    tm.validate();
    check_same_shape(cand, orig, "project");
    Tensor out(cand.shape);
    for (std::size_t i = 0; i < cand.size(); ++i) {
        double v = cand[i];
        double lo = orig[i] - tm.epsilon;
        double hi = orig[i] + tm.epsilon;
        v = std::min(std::max(v, lo), hi);
        v = std::min(std::max(v, tm.pixel_lo), tm.pixel_hi);
        out[i] = v;
    }
    return out;
}

// Uniform start point inside the feasible set: orig + U[-eps, eps] noise,
// projected. With eps = 0 this returns orig exactly.
inline Tensor random_start(const Tensor& orig, const ThreatModel& tm, Rng& rng) {
    tm.validate();
    Tensor noise = uniform_noise(orig.shape, -tm.epsilon, tm.epsilon, rng);
    return project(add(orig, noise), orig, tm);
}

inline double perturbation_linf(const Tensor& adv, const Tensor& orig) {
    check_same_shape(adv, orig, "perturbation_linf");
    return linf_norm(sub(adv, orig));
}

} // namespace advkit
