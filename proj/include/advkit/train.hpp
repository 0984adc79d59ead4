#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "mlp.hpp"
#include "optimizer.hpp"
#include "rng.hpp"

namespace advkit {

struct TrainReport {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0; // 0 when no test set was given
    double final_loss = 0.0;    // mean loss of the last epoch
    std::size_t epochs = 0;
};

inline double accuracy(const GradientOracle& model, const Dataset& ds) {
    if (ds.size() == 0) return 0.0;
    std::size_t correct = 0;
    for (const LabeledExample& e : ds.examples) {
        if (argmax_class(model.predict(e.image)) == e.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

// Minibatch training with the chosen first-order update rule. Deterministic
// for a fixed config: the shuffle stream depends only on cfg.seed. Aborts
// with a diagnostic if the batch loss ever turns non-finite.
inline TrainReport train(MlpClassifier& model, const Dataset& train_set,
                         const Dataset* test_set, const OptimizerConfig& cfg) {
    cfg.validate();
    if (train_set.size() == 0) {
        throw std::invalid_argument("train: empty training set");
    }
    if (Tensor::numel(train_set.input_shape) != model.input_dim()) {
        throw std::invalid_argument("train: dataset input size does not match model");
    }
    if (train_set.num_classes != model.num_classes()) {
        throw std::invalid_argument("train: dataset classes do not match model output");
    }

    Optimizer opt(cfg.kind, cfg.learning_rate, cfg.decay);
    std::vector<double> params = model.flat_params();
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed);

    double epoch_loss = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the deterministic stream.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }
        epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            double batch_loss = 0.0;
            auto grad_at = [&](const std::vector<double>& p) {
                model.set_flat_params(p);
                std::vector<double> g(p.size(), 0.0);
                batch_loss = 0.0;
                for (std::size_t k = start; k < end; ++k) {
                    const LabeledExample& e = train_set.examples[order[k]];
                    batch_loss += model.param_gradient(e.image.data.data(), e.label, g);
                }
                double inv = 1.0 / static_cast<double>(end - start);
                for (double& v : g) v *= inv;
                batch_loss *= inv;
                return g;
            };
            opt.step(params, grad_at);
            if (!std::isfinite(batch_loss)) {
                throw std::runtime_error(
                    "train: non-finite loss at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(batches) +
                    " (learning rate too high or corrupt data)");
            }
            epoch_loss += batch_loss;
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);
    }
    model.set_flat_params(params);

    TrainReport rep;
    rep.epochs = cfg.epochs;
    rep.final_loss = epoch_loss;
    rep.train_accuracy = accuracy(model, train_set);
    rep.test_accuracy = test_set ? accuracy(model, *test_set) : 0.0;
    return rep;
}

} // namespace advkit
