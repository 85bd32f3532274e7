#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tslab {

// Row-major 2-D double matrix. Rows index time, cols index channels/units.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    Tensor2(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != static_cast<std::size_t>(r) * c)
            throw std::invalid_argument("Tensor2: data length does not match rows*cols");
    }

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    std::size_t size() const { return data.size(); }

    void resize(int r, int c) {
        rows = r;
        cols = c;
        data.assign(static_cast<std::size_t>(r) * c, 0.0);
    }

    void zero() { std::fill(data.begin(), data.end(), 0.0); }

    bool same_shape(const Tensor2& other) const { return rows == other.rows && cols == other.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
};

// y += x * W, with x a row vector of length `in` and W an in-by-out matrix.
inline void addvm(const double* x, const Tensor2& w, double* y) {
    const int in = w.rows, out = w.cols;
    for (int i = 0; i < in; ++i) {
        const double xi = x[i];
        const double* wr = w.row(i);
        for (int j = 0; j < out; ++j) y[j] += xi * wr[j];
    }
}

// dx += dy * W^T
inline void addvm_t(const double* dy, const Tensor2& w, double* dx) {
    const int in = w.rows, out = w.cols;
    for (int i = 0; i < in; ++i) {
        const double* wr = w.row(i);
        double acc = 0.0;
        for (int j = 0; j < out; ++j) acc += dy[j] * wr[j];
        dx[i] += acc;
    }
}

// dW += x^T * dy (outer product of row vectors)
inline void add_outer(const double* x, const double* dy, Tensor2& dw) {
    const int in = dw.rows, out = dw.cols;
    for (int i = 0; i < in; ++i) {
        const double xi = x[i];
        double* dwr = dw.row(i);
        for (int j = 0; j < out; ++j) dwr[j] += xi * dy[j];
    }
}

}  // namespace tslab
