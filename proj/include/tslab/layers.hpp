#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tslab/tensor.hpp"

namespace tslab {

enum class Activation { linear, relu };

struct ParamRef {
    std::string name;
    Tensor2* value;
    Tensor2* grad;
};

using Shape = std::pair<int, int>;  // rows, cols

class Layer {
public:
    virtual ~Layer() = default;

    // Runs the layer and keeps whatever backward() needs. The returned
    // reference stays valid until the next forward() on this layer.
    virtual const Tensor2& forward(const Tensor2& in) = 0;

    // Accumulates parameter gradients and returns the input gradient.
    // Requires a preceding forward() call.
    virtual const Tensor2& backward(const Tensor2& grad_out) = 0;

    virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {}

    virtual std::unique_ptr<Layer> clone() const = 0;
    virtual std::string name() const = 0;
    virtual Shape output_shape(Shape in) const = 0;

protected:
    void require_cache(bool have, const std::string& who) const;
};

class DenseLayer : public Layer {
public:
    DenseLayer(int in, int out, Activation act);

    const Tensor2& forward(const Tensor2& in) override;
    const Tensor2& backward(const Tensor2& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }
    std::string name() const override;
    Shape output_shape(Shape in) const override;

    Tensor2 weight, bias;  // (in x out), (1 x out)
    Tensor2 grad_weight, grad_bias;

private:
    int in_, out_;
    Activation act_;
    Tensor2 x_, y_, gin_;
    bool have_cache_ = false;
};

// 1-D convolution over the row (time) axis, kernel 3, stride 1, no padding,
// rectifier activation. Input L x in_channels, output (L-2) x filters.
class Conv1DLayer : public Layer {
public:
    Conv1DLayer(int in_channels, int filters);

    const Tensor2& forward(const Tensor2& in) override;
    const Tensor2& backward(const Tensor2& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1DLayer>(*this); }
    std::string name() const override;
    Shape output_shape(Shape in) const override;

    static constexpr int kernel = 3;

    Tensor2 weight, bias;  // (kernel*in_channels x filters), (1 x filters)
    Tensor2 grad_weight, grad_bias;

private:
    int in_ch_, filters_;
    Tensor2 x_, y_, gin_;
    bool have_cache_ = false;
};

// Max pooling of size 2 over the time axis; odd trailing element dropped.
class MaxPool1DLayer : public Layer {
public:
    MaxPool1DLayer() = default;

    const Tensor2& forward(const Tensor2& in) override;
    const Tensor2& backward(const Tensor2& grad_out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool1DLayer>(*this); }
    std::string name() const override { return "MaxPool1D(2)"; }
    Shape output_shape(Shape in) const override;

    static constexpr int pool = 2;

private:
    int in_rows_ = 0, cols_ = 0;
    std::vector<int> argmax_;
    Tensor2 y_, gin_;
    bool have_cache_ = false;
};

// Reshapes L x C to 1 x (L*C), time-major (t ascending, channels interleaved).
class FlattenLayer : public Layer {
public:
    FlattenLayer() = default;

    const Tensor2& forward(const Tensor2& in) override;
    const Tensor2& backward(const Tensor2& grad_out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<FlattenLayer>(*this); }
    std::string name() const override { return "Flatten"; }
    Shape output_shape(Shape in) const override { return {1, in.first * in.second}; }

private:
    int in_rows_ = 0, in_cols_ = 0;
    Tensor2 y_, gin_;
    bool have_cache_ = false;
};

// Standard GRU: update and reset gates plus candidate state, one bias per
// gate, zero initial hidden state, full backpropagation through time.
class GRULayer : public Layer {
public:
    GRULayer(int in, int units, bool return_sequence);

    const Tensor2& forward(const Tensor2& in) override;
    const Tensor2& backward(const Tensor2& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<GRULayer>(*this); }
    std::string name() const override;
    Shape output_shape(Shape in) const override;

    Tensor2 wz, wr, wh;  // input weights, in x units
    Tensor2 uz, ur, uh;  // recurrent weights, units x units
    Tensor2 bz, br, bh;  // 1 x units
    Tensor2 gwz, gwr, gwh, guz, gur, guh, gbz, gbr, gbh;

private:
    int in_, units_;
    bool return_sequence_;
    Tensor2 x_, h_, z_, r_, hh_, rh_;  // per-step caches, T x units
    Tensor2 out_, gin_;
    bool have_cache_ = false;
};

// Standard LSTM: input/forget/cell/output gates, one bias per gate, no
// peepholes, zero initial hidden and cell state, full BPTT.
class LSTMLayer : public Layer {
public:
    LSTMLayer(int in, int units, bool return_sequence);

    const Tensor2& forward(const Tensor2& in) override;
    const Tensor2& backward(const Tensor2& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<LSTMLayer>(*this); }
    std::string name() const override;
    Shape output_shape(Shape in) const override;

    Tensor2 wi, wf, wg, wo;  // input weights, in x units
    Tensor2 ui, uf, ug, uo;  // recurrent weights, units x units
    Tensor2 bi, bf, bg, bo;  // 1 x units
    Tensor2 gwi, gwf, gwg, gwo, gui, guf, gug, guo, gbi, gbf, gbg, gbo;

private:
    int in_, units_;
    bool return_sequence_;
    Tensor2 x_, h_, c_, ig_, fg_, gg_, og_, tc_;  // per-step caches
    Tensor2 out_, gin_;
    bool have_cache_ = false;
};

}  // namespace tslab
