#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace advkit {

struct LabeledExample {
    Tensor image;
    int label = 0;
};

// In-memory labeled dataset. Every image shares input_shape, labels lie in
// [0, num_classes), and pixel values lie in [0, 1].
struct Dataset {
    std::string name;
    std::size_t num_classes = 0;
    std::vector<std::size_t> input_shape;
    std::vector<LabeledExample> examples;

    std::size_t size() const { return examples.size(); }

    void validate() const {
        if (num_classes == 0) {
            throw std::invalid_argument("dataset: num_classes must be >= 1");
        }
        for (std::size_t j = 0; j < examples.size(); ++j) {
            const LabeledExample& e = examples[j];
            if (e.image.shape != input_shape) {
                throw std::invalid_argument("dataset: example " + std::to_string(j) +
                                            " shape differs from input_shape");
            }
            if (e.label < 0 || static_cast<std::size_t>(e.label) >= num_classes) {
                throw std::invalid_argument("dataset: example " + std::to_string(j) +
                                            " label out of range");
            }
            for (double v : e.image.data) {
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw std::invalid_argument("dataset: example " + std::to_string(j) +
                                                " pixel outside [0, 1]");
                }
            }
        }
    }

    Dataset take(std::size_t n) const {
        Dataset out;
        out.name = name;
        out.num_classes = num_classes;
        out.input_shape = input_shape;
        std::size_t k = std::min(n, examples.size());
        out.examples.assign(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(k));
        return out;
    }
};

} // namespace advkit
