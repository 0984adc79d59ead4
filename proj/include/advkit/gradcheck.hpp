#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mlp.hpp"
#include "oracle.hpp"
#include "tensor.hpp"

namespace advkit {

// Central-difference gradient of the oracle loss at x. Each coordinate costs
// two loss evaluations (predict + loss_from_logits), none of which share code
// with the analytic backward pass.
inline Tensor finite_difference_gradient(const GradientOracle& oracle,
                                         const Tensor& x, int label, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("finite_difference_gradient: h must be > 0");
    }
    Tensor g(x.shape);
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double orig = probe[i];
        probe[i] = orig + h;
        double up = oracle.loss_from_logits(oracle.predict(probe), label);
        probe[i] = orig - h;
        double down = oracle.loss_from_logits(oracle.predict(probe), label);
        probe[i] = orig;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

struct GradCheckReport {
    double max_rel_error = 0.0; // over coordinates that were not excluded
    std::size_t checked = 0;    // coordinates compared
    std::size_t excluded = 0;   // coordinates skipped near a ReLU kink
    bool pass = false;
};

namespace detail {

// Error relative to the finite-difference value, floored at 1e-8 so that
// coordinates where both sides vanish compare as equal instead of 0/0.
inline double rel_error(double analytic, double fd) {
    return std::fabs(analytic - fd) / (std::fabs(fd) + 1e-8);
}

} // namespace detail

// Compares analytic and finite-difference gradients with no exclusions.
// Suitable for smooth oracles.
inline GradCheckReport gradient_check(const GradientOracle& oracle,
                                      const std::vector<Tensor>& xs,
                                      const std::vector<int>& labels,
                                      double h, double tolerance) {
    if (xs.size() != labels.size()) {
        throw std::invalid_argument("gradient_check: inputs/labels length mismatch");
    }
    GradCheckReport rep;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        Tensor analytic = oracle.loss_gradient(xs[j], labels[j]).second;
        Tensor fd = finite_difference_gradient(oracle, xs[j], labels[j], h);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            rep.max_rel_error = std::max(rep.max_rel_error, detail::rel_error(analytic[i], fd[i]));
            rep.checked += 1;
        }
    }
    rep.pass = rep.max_rel_error <= tolerance;
    return rep;
}

// MLP-aware variant: a coordinate whose +-10h probe flips any hidden ReLU
// unit sits on a kink, where the central difference straddles a
// non-differentiable point and disagrees with the one-sided subgradient by
// construction. Those coordinates are excluded; everything else must meet
// the tolerance. The kink probe is only run for coordinates that fail, so
// the common all-smooth case costs nothing extra.
inline GradCheckReport gradient_check(const MlpClassifier& model,
                                      const std::vector<Tensor>& xs,
                                      const std::vector<int>& labels,
                                      double h, double tolerance) {
    if (xs.size() != labels.size()) {
        throw std::invalid_argument("gradient_check: inputs/labels length mismatch");
    }
    GradCheckReport rep;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        Tensor analytic = model.loss_gradient(xs[j], labels[j]).second;
        Tensor fd = finite_difference_gradient(model, xs[j], labels[j], h);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            double err = detail::rel_error(analytic[i], fd[i]);
            if (err > tolerance) {
                Tensor probe = xs[j];
                probe[i] = xs[j][i] + 10.0 * h;
                std::vector<std::uint8_t> up = model.relu_mask(probe);
                probe[i] = xs[j][i] - 10.0 * h;
                std::vector<std::uint8_t> down = model.relu_mask(probe);
                if (up != down) {
                    rep.excluded += 1;
                    continue;
                }
            }
            rep.max_rel_error = std::max(rep.max_rel_error, err);
            rep.checked += 1;
        }
    }
    rep.pass = rep.max_rel_error <= tolerance;
    return rep;
}

} // namespace advkit
