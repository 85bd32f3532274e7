#include "tslab/network.hpp"

#include "tslab/errors.hpp"

namespace tslab {

Network::Network(const Network& other) : in_rows_(other.in_rows_), in_cols_(other.in_cols_) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
    if (this == &other) return *this;
    Network tmp(other);
    *this = std::move(tmp);
    return *this;
}

const Tensor2& Network::forward(const Tensor2& input) {
    if (layers_.empty()) throw ConfigError("Network::forward: empty network");
    if (in_rows_ > 0 && (input.rows != in_rows_ || input.cols != in_cols_))
        throw ConfigError("Network::forward: expected input " + std::to_string(in_rows_) + "x" +
                          std::to_string(in_cols_) + ", got " + input.shape_str());
    if (!input.all_finite()) throw NumericError("Network::forward: non-finite input");
    const Tensor2* cur = &input;
    for (auto& l : layers_) {
        cur = &l->forward(*cur);
        if (!cur->all_finite())
            throw NumericError("Network::forward: non-finite activation in layer " + l->name());
    }
    return *cur;
}

const Tensor2& Network::backward(const Tensor2& output_grad) {
    if (layers_.empty()) throw ConfigError("Network::backward: empty network");
    const Tensor2* cur = &output_grad;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = &(*it)->backward(*cur);
    return *cur;
}

std::vector<ParamRef> Network::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_params("layer" + std::to_string(i) + ".", out);
    return out;
}

std::size_t Network::count_params() const {
    std::vector<ParamRef> refs;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        const_cast<Layer&>(*layers_[i]).collect_params("", refs);
    std::size_t n = 0;
    for (const auto& p : refs) n += p.value->size();
    return n;
}

void Network::zero_grads() {
    for (auto& p : params()) p.grad->zero();
}

std::string Network::describe() const {
    std::string s;
    for (const auto& l : layers_) {
        if (!s.empty()) s += " -> ";
        s += l->name();
    }
    return s;
}

}  // namespace tslab
