#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tslab/layers.hpp"

namespace tslab {

// A feed-forward stack of layers with a shared parameter/gradient store.
// Plain value type: copies are deep and independent.
class Network {
public:
    Network() = default;
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    void set_input_shape(int rows, int cols) {
        in_rows_ = rows;
        in_cols_ = cols;
    }
    Shape input_shape() const { return {in_rows_, in_cols_}; }

    // Runs all layers; throws NumericError naming the layer that produced a
    // non-finite activation, ConfigError on shape mismatch.
    const Tensor2& forward(const Tensor2& input);

    // Backpropagates grad w.r.t. the network output, accumulating parameter
    // gradients. Returns grad w.r.t. the input.
    const Tensor2& backward(const Tensor2& output_grad);

    std::vector<ParamRef> params();
    std::size_t count_params() const;
    void zero_grads();

    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    std::string describe() const;

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    int in_rows_ = 0, in_cols_ = 0;  // 0 = unchecked
};

}  // namespace tslab
