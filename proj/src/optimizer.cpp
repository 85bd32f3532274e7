#include "tslab/optimizer.hpp"

#include <cmath>

#include "tslab/errors.hpp"

namespace tslab {

void Optimizer::step(std::vector<ParamRef>& params) {
    for (const auto& p : params)
        if (!p.grad->all_finite())
            throw NumericError("Optimizer::step: non-finite gradient for parameter " + p.name);
    ++step_;
    if (cfg_.algo == OptAlgo::sgd) {
        for (auto& p : params) {
            double* w = p.value->data.data();
            double* g = p.grad->data.data();
            const std::size_t n = p.value->size();
            for (std::size_t i = 0; i < n; ++i) w[i] -= cfg_.learning_rate * g[i];
            p.grad->zero();
        }
        return;
    }
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const auto& p : params) {
            m_.emplace_back(p.value->rows, p.value->cols);
            v_.emplace_back(p.value->rows, p.value->cols);
        }
    }
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        double* w = params[k].value->data.data();
        double* g = params[k].grad->data.data();
        double* m = m_[k].data.data();
        double* v = v_[k].data.data();
        const std::size_t n = params[k].value->size();
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
        params[k].grad->zero();
    }
}

}  // namespace tslab
