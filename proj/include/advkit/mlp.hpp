#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oracle.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace advkit {

enum class Activation : std::uint8_t { relu = 0, identity = 1 };

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights; // row-major [out][in]
    std::vector<double> bias;    // [out]
    Activation act = Activation::relu;
};

// Fully connected classifier over flat inputs. Inputs of any shape are
// accepted as long as the element count matches; image tensors keep their
// 2-D shape throughout the attack pipeline and are flattened here.
class MlpClassifier final : public GradientOracle {
public:
    MlpClassifier() = default;

    explicit MlpClassifier(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
        if (layers_.empty()) {
            throw std::invalid_argument("mlp: at least one layer required");
        }
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const DenseLayer& l = layers_[i];
            if (l.in == 0 || l.out == 0 || l.weights.size() != l.in * l.out ||
                l.bias.size() != l.out) {
                throw std::invalid_argument("mlp: malformed layer " + std::to_string(i));
            }
            if (i + 1 < layers_.size() && layers_[i + 1].in != l.out) {
                throw std::invalid_argument("mlp: layer width mismatch at " + std::to_string(i));
            }
        }
    }

    MlpClassifier(const MlpClassifier& o)
        : layers_(o.layers_),
          grad_calls_(o.grad_calls_.load()),
          predict_calls_(o.predict_calls_.load()) {}

    MlpClassifier& operator=(const MlpClassifier& o) {
        layers_ = o.layers_;
        grad_calls_.store(o.grad_calls_.load());
        predict_calls_.store(o.predict_calls_.load());
        return *this;
    }

    // He-scaled normal init: widths = {input_dim, hidden..., num_classes}.
    // Hidden layers use ReLU, the output layer is linear.
    static MlpClassifier random_init(const std::vector<std::size_t>& widths, std::uint64_t seed) {
        if (widths.size() < 2) {
            throw std::invalid_argument("mlp: need at least input and output widths");
        }
        Rng rng(seed);
        std::vector<DenseLayer> layers;
        for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
            DenseLayer l;
            l.in = widths[i];
            l.out = widths[i + 1];
            l.act = (i + 2 < widths.size()) ? Activation::relu : Activation::identity;
            double s = std::sqrt(2.0 / static_cast<double>(l.in));
            l.weights.resize(l.in * l.out);
            for (double& w : l.weights) w = s * rng.normal();
            l.bias.assign(l.out, 0.0);
            layers.push_back(std::move(l));
        }
        return MlpClassifier(std::move(layers));
    }

    std::size_t num_classes() const override { return layers_.back().out; }
    std::vector<std::size_t> input_shape() const override { return {layers_.front().in}; }
    std::size_t input_dim() const { return layers_.front().in; }

    Tensor predict(const Tensor& x) const override {
        std::size_t d = input_dim();
        if (x.size() == d) {
            predict_calls_.fetch_add(1, std::memory_order_relaxed);
            std::vector<double> logits = forward(x.data.data());
            return Tensor::unchecked({num_classes()}, std::move(logits));
        }
        // Batch: leading extent is the count, remaining elements per row
        // must match the input dimension.
        if (!x.shape.empty() && x.size() % x.shape[0] == 0 &&
            x.size() / x.shape[0] == d) {
            std::size_t n = x.shape[0];
            predict_calls_.fetch_add(n, std::memory_order_relaxed);
            std::size_t c = num_classes();
            Tensor out({n, c});
            for (std::size_t j = 0; j < n; ++j) {
                std::vector<double> logits = forward(x.data.data() + j * d);
                for (std::size_t k = 0; k < c; ++k) out[j * c + k] = logits[k];
            }
            return out;
        }
        throw std::invalid_argument("mlp: input size does not match model input dimension");
    }

    std::pair<double, Tensor> loss_gradient(const Tensor& x, int label) const override {
        std::size_t d = input_dim();
        if (x.size() != d) {
            throw std::invalid_argument("mlp: input size does not match model input dimension");
        }
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes()) {
            throw std::invalid_argument("mlp: label out of range");
        }
        grad_calls_.fetch_add(1, std::memory_order_relaxed);

        // Forward pass keeping pre-activations for the backward sweep.
        std::size_t L = layers_.size();
        std::vector<std::vector<double>> acts(L + 1);
        std::vector<std::vector<double>> pre(L);
        acts[0] = x.data;
        for (std::size_t i = 0; i < L; ++i) {
            pre[i] = affine(layers_[i], acts[i].data());
            acts[i + 1] = pre[i];
            if (layers_[i].act == Activation::relu) {
                for (double& v : acts[i + 1]) v = v > 0.0 ? v : 0.0;
            }
        }
        Tensor logits = Tensor::unchecked({num_classes()}, acts[L]);
        double loss = softmax_cross_entropy(logits, label);

        // dL/dlogits = softmax - onehot, then backprop to the input.
        std::vector<double> delta = softmax(logits);
        delta[static_cast<std::size_t>(label)] -= 1.0;
        for (std::size_t i = L; i-- > 0;) {
            if (layers_[i].act == Activation::relu) {
                // Subgradient 0 at the kink.
                for (std::size_t k = 0; k < delta.size(); ++k) {
                    if (!(pre[i][k] > 0.0)) delta[k] = 0.0;
                }
            }
            delta = backprop_input(layers_[i], delta);
        }
        Tensor grad = Tensor::unchecked(x.shape, std::move(delta));
        return {loss, std::move(grad)};
    }

    std::uint64_t grad_calls() const override {
        return grad_calls_.load(std::memory_order_relaxed);
    }
    std::uint64_t predict_calls() const override {
        return predict_calls_.load(std::memory_order_relaxed);
    }

    const std::vector<DenseLayer>& layers() const { return layers_; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const DenseLayer& l : layers_) n += l.weights.size() + l.bias.size();
        return n;
    }

    std::vector<double> flat_params() const {
        std::vector<double> p;
        p.reserve(param_count());
        for (const DenseLayer& l : layers_) {
            p.insert(p.end(), l.weights.begin(), l.weights.end());
            p.insert(p.end(), l.bias.begin(), l.bias.end());
        }
        return p;
    }

    void set_flat_params(const std::vector<double>& p) {
        if (p.size() != param_count()) {
            throw std::invalid_argument("mlp: parameter vector length mismatch");
        }
        std::size_t off = 0;
        for (DenseLayer& l : layers_) {
            std::copy(p.begin() + off, p.begin() + off + l.weights.size(), l.weights.begin());
            off += l.weights.size();
            std::copy(p.begin() + off, p.begin() + off + l.bias.size(), l.bias.begin());
            off += l.bias.size();
        }
    }

    // Loss, parameter gradient (flat layout as flat_params), and input
    // gradient for one example. Training machinery; does not touch the
    // query counters.
    double param_gradient(const double* x, int label, std::vector<double>& grad_out) const {
        std::size_t L = layers_.size();
        std::vector<std::vector<double>> acts(L + 1);
        std::vector<std::vector<double>> pre(L);
        acts[0].assign(x, x + input_dim());
        for (std::size_t i = 0; i < L; ++i) {
            pre[i] = affine(layers_[i], acts[i].data());
            acts[i + 1] = pre[i];
            if (layers_[i].act == Activation::relu) {
                for (double& v : acts[i + 1]) v = v > 0.0 ? v : 0.0;
            }
        }
        Tensor logits = Tensor::unchecked({num_classes()}, acts[L]);
        double loss = softmax_cross_entropy(logits, label);

        if (grad_out.size() != param_count()) grad_out.assign(param_count(), 0.0);
        std::vector<double> delta = softmax(logits);
        delta[static_cast<std::size_t>(label)] -= 1.0;

        // Accumulate dW, db layer by layer while walking backwards.
        std::size_t off = param_count();
        for (std::size_t i = L; i-- > 0;) {
            const DenseLayer& l = layers_[i];
            if (l.act == Activation::relu) {
                for (std::size_t k = 0; k < delta.size(); ++k) {
                    if (!(pre[i][k] > 0.0)) delta[k] = 0.0;
                }
            }
            off -= l.bias.size();
            for (std::size_t r = 0; r < l.out; ++r) grad_out[off + r] += delta[r];
            off -= l.weights.size();
            const std::vector<double>& a = acts[i];
            for (std::size_t r = 0; r < l.out; ++r) {
                double dr = delta[r];
                if (dr == 0.0) continue;
                double* row = grad_out.data() + off + r * l.in;
                for (std::size_t c = 0; c < l.in; ++c) row[c] += dr * a[c];
            }
            if (i > 0) delta = backprop_input(l, delta);
        }
        return loss;
    }

    // ReLU mask over all hidden units for kink-proximity probes: one byte
    // per hidden unit, 1 where the pre-activation is strictly positive.
    std::vector<std::uint8_t> relu_mask(const Tensor& x) const {
        if (x.size() != input_dim()) {
            throw std::invalid_argument("mlp: input size does not match model input dimension");
        }
        std::vector<std::uint8_t> mask;
        std::vector<double> a = x.data;
        for (const DenseLayer& l : layers_) {
            std::vector<double> z = affine(l, a.data());
            if (l.act == Activation::relu) {
                for (double v : z) mask.push_back(v > 0.0 ? 1 : 0);
                for (double& v : z) v = v > 0.0 ? v : 0.0;
            }
            a = std::move(z);
        }
        return mask;
    }

private:
    static std::vector<double> affine(const DenseLayer& l, const double* in) {
        std::vector<double> out(l.out);
        for (std::size_t r = 0; r < l.out; ++r) {
            const double* row = l.weights.data() + r * l.in;
            double s = l.bias[r];
            for (std::size_t c = 0; c < l.in; ++c) s += row[c] * in[c];
            out[r] = s;
        }
        return out;
    }

    static std::vector<double> backprop_input(const DenseLayer& l,
                                              const std::vector<double>& delta) {
        std::vector<double> out(l.in, 0.0);
        for (std::size_t r = 0; r < l.out; ++r) {
            double dr = delta[r];
            if (dr == 0.0) continue;
            const double* row = l.weights.data() + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) out[c] += dr * row[c];
        }
        return out;
    }

    std::vector<double> forward(const double* x) const {
        std::vector<double> a(x, x + input_dim());
        for (const DenseLayer& l : layers_) {
            a = affine(l, a.data());
            if (l.act == Activation::relu) {
                for (double& v : a) v = v > 0.0 ? v : 0.0;
            }
        }
        return a;
    }

    std::vector<DenseLayer> layers_;
    mutable std::atomic<std::uint64_t> grad_calls_{0};
    mutable std::atomic<std::uint64_t> predict_calls_{0};
};

} // namespace advkit
