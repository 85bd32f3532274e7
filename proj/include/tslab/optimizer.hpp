#pragma once

#include <cstdint>
#include <vector>

#include "tslab/layers.hpp"

namespace tslab {

enum class OptAlgo { sgd, adam };

struct OptimizerConfig {
    OptAlgo algo = OptAlgo::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Applies one update from the accumulated gradients, then clears them.
// Adam moments are kept per parameter tensor, keyed by position, so the
// optimizer must always be fed the same network's params().
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

    // Throws NumericError if any gradient is non-finite.
    void step(std::vector<ParamRef>& params);

    std::int64_t step_count() const { return step_; }
    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    std::vector<Tensor2> m_, v_;
    std::int64_t step_ = 0;
};

}  // namespace tslab
