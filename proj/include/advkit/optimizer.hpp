#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace advkit {

enum class OptimizerKind { sgd, momentum, nesterov_standard, nesterov_equivalent };

inline const char* optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::momentum: return "momentum";
        case OptimizerKind::nesterov_standard: return "nesterov";
        case OptimizerKind::nesterov_equivalent: return "nesterov-equiv";
    }
    return "?";
}

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::momentum;
    double learning_rate = 0.05;
    double decay = 0.9; // momentum coefficient mu
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) {
            throw std::invalid_argument("optimizer: learning_rate must be > 0");
        }
        if (!(decay >= 0.0 && decay < 1.0)) {
            throw std::invalid_argument("optimizer: decay must lie in [0, 1)");
        }
        if (epochs == 0) {
            throw std::invalid_argument("optimizer: epochs must be >= 1");
        }
        if (batch_size == 0) {
            throw std::invalid_argument("optimizer: batch_size must be >= 1");
        }
    }
};

// First-order updater over a flat parameter vector.
//
//   sgd:                  p -= lr * g(p)
//   momentum:             v  = mu*v - lr*g(p);          p += v
//   nesterov_standard:    v  = mu*v - lr*g(p + mu*v);   p += v
//   nesterov_equivalent:  v  = mu*v - lr*g(p) + mu*lr*(g_prev - g(p)); p += v
//
// The equivalent form evaluates the gradient at the current iterate and
// corrects with the previous gradient instead of evaluating at the
// lookahead point; on the first step the correction term is zero. The two
// Nesterov forms track each other exactly on quadratic objectives.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr, double mu) : kind_(kind), lr_(lr), mu_(mu) {
        if (!(lr > 0.0)) {
            throw std::invalid_argument("optimizer: learning_rate must be > 0");
        }
        if (!(mu >= 0.0 && mu < 1.0)) {
            throw std::invalid_argument("optimizer: decay must lie in [0, 1)");
        }
    }

    using GradFn = std::function<std::vector<double>(const std::vector<double>&)>;

    void step(std::vector<double>& params, const GradFn& grad_at) {
        std::size_t n = params.size();
        if (velocity_.size() != n) velocity_.assign(n, 0.0);

        switch (kind_) {
            case OptimizerKind::sgd: {
                std::vector<double> g = grad_at(params);
                for (std::size_t i = 0; i < n; ++i) params[i] -= lr_ * g[i];
                break;
            }
            case OptimizerKind::momentum: {
                std::vector<double> g = grad_at(params);
                for (std::size_t i = 0; i < n; ++i) {
                    velocity_[i] = mu_ * velocity_[i] - lr_ * g[i];
                    params[i] += velocity_[i];
                }
                break;
            }
            case OptimizerKind::nesterov_standard: {
                std::vector<double> look(n);
                for (std::size_t i = 0; i < n; ++i) look[i] = params[i] + mu_ * velocity_[i];
                std::vector<double> g = grad_at(look);
                for (std::size_t i = 0; i < n; ++i) {
                    velocity_[i] = mu_ * velocity_[i] - lr_ * g[i];
                    params[i] += velocity_[i];
                }
                break;
            }
            case OptimizerKind::nesterov_equivalent: {
                std::vector<double> g = grad_at(params);
                if (prev_grad_.size() != n) {
                    prev_grad_ = g; // first step: correction vanishes
                }
                for (std::size_t i = 0; i < n; ++i) {
                    velocity_[i] = mu_ * velocity_[i] - lr_ * g[i] + mu_ * lr_ * (prev_grad_[i] - g[i]);
                    params[i] += velocity_[i];
                }
                prev_grad_ = std::move(g);
                break;
            }
        }
    }

    const std::vector<double>& velocity() const { return velocity_; }

private:
    OptimizerKind kind_;
    double lr_;
    double mu_;
    std::vector<double> velocity_;
    std::vector<double> prev_grad_;
};

} // namespace advkit
