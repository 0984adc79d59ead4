#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace advkit {

// Index of the largest logit; ties resolve to the lowest class index.
inline int argmax_class(const Tensor& logits) {
    if (logits.size() == 0) {
        throw std::invalid_argument("argmax_class: empty logits");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return static_cast<int>(best);
}

// Numerically stable softmax cross-entropy: logsumexp(z) - z[label].
// Always >= 0 for finite logits.
inline double softmax_cross_entropy(const Tensor& logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw std::invalid_argument("softmax_cross_entropy: label out of range");
    }
    double zmax = logits[0];
    for (double v : logits.data) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double v : logits.data) sum += std::exp(v - zmax);
    return zmax + std::log(sum) - logits[label];
}

// Softmax probabilities, same stabilization as the loss.
inline std::vector<double> softmax(const Tensor& logits) {
    double zmax = logits[0];
    for (double v : logits.data) zmax = std::max(zmax, v);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - zmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

// White-box attack surface of a classifier. Attacks see nothing else: they
// query logits, the loss, and the input gradient of the loss, and every
// query is counted so evaluation budgets are enforceable.
class GradientOracle {
public:
    virtual ~GradientOracle() = default;

    virtual std::size_t num_classes() const = 0;
    virtual std::vector<std::size_t> input_shape() const = 0;

    // Logits for one input (shape {num_classes}) or a batch whose first
    // extent is the batch size (shape {n, num_classes}). Bumps
    // predict_calls by the number of examples evaluated.
    virtual Tensor predict(const Tensor& x) const = 0;

    // Loss and its gradient with respect to x, for a single input. Bumps
    // grad_calls by one. Throws std::invalid_argument for a label outside
    // [0, num_classes).
    virtual std::pair<double, Tensor> loss_gradient(const Tensor& x, int label) const = 0;

    // Loss recomputed from logits already in hand; costs no queries.
    virtual double loss_from_logits(const Tensor& logits, int label) const {
        return softmax_cross_entropy(logits, label);
    }

    virtual std::uint64_t grad_calls() const = 0;
    virtual std::uint64_t predict_calls() const = 0;
};

} // namespace advkit
