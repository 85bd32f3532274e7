#include "tslab/layers.hpp"

#include <algorithm>
#include <cmath>

#include "tslab/errors.hpp"

namespace tslab {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_shape(const Tensor2& in, int rows, int cols, const std::string& who) {
    if ((rows > 0 && in.rows != rows) || in.cols != cols)
        throw ConfigError(who + ": expected input " + (rows > 0 ? std::to_string(rows) : std::string("L")) +
                          "x" + std::to_string(cols) + ", got " + in.shape_str());
}

}  // namespace

void Layer::require_cache(bool have, const std::string& who) const {
    if (!have) throw ConfigError(who + ": backward called without a matching forward");
}

// ---------------------------------------------------------------- Dense

DenseLayer::DenseLayer(int in, int out, Activation act)
    : weight(in, out), bias(1, out), grad_weight(in, out), grad_bias(1, out),
      in_(in), out_(out), act_(act) {}

std::string DenseLayer::name() const {
    return "Dense(" + std::to_string(in_) + "," + std::to_string(out_) + "," +
           (act_ == Activation::relu ? "relu" : "linear") + ")";
}

Shape DenseLayer::output_shape(Shape in) const {
    if (in.first != 1 || in.second != in_)
        throw ConfigError(name() + ": expects 1x" + std::to_string(in_) + " input");
    return {1, out_};
}

const Tensor2& DenseLayer::forward(const Tensor2& in) {
    check_shape(in, 1, in_, name());
    x_ = in;
    y_.resize(1, out_);
    double* y = y_.row(0);
    const double* b = bias.row(0);
    for (int j = 0; j < out_; ++j) y[j] = b[j];
    addvm(x_.row(0), weight, y);
    if (act_ == Activation::relu)
        for (int j = 0; j < out_; ++j) y[j] = std::max(0.0, y[j]);
    have_cache_ = true;
    return y_;
}

const Tensor2& DenseLayer::backward(const Tensor2& grad_out) {
    require_cache(have_cache_, name());
    check_shape(grad_out, 1, out_, name() + " backward");
    static thread_local std::vector<double> dpre;
    dpre.assign(grad_out.row(0), grad_out.row(0) + out_);
    if (act_ == Activation::relu) {
        const double* y = y_.row(0);
        for (int j = 0; j < out_; ++j)
            if (y[j] <= 0.0) dpre[j] = 0.0;
    }
    double* gb = grad_bias.row(0);
    for (int j = 0; j < out_; ++j) gb[j] += dpre[j];
    add_outer(x_.row(0), dpre.data(), grad_weight);
    gin_.resize(1, in_);
    addvm_t(dpre.data(), weight, gin_.row(0));
    return gin_;
}

void DenseLayer::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "W", &weight, &grad_weight});
    out.push_back({prefix + "b", &bias, &grad_bias});
}

// ---------------------------------------------------------------- Conv1D

Conv1DLayer::Conv1DLayer(int in_channels, int filters)
    : weight(kernel * in_channels, filters), bias(1, filters),
      grad_weight(kernel * in_channels, filters), grad_bias(1, filters),
      in_ch_(in_channels), filters_(filters) {}

std::string Conv1DLayer::name() const {
    return "Conv1D(" + std::to_string(in_ch_) + "," + std::to_string(filters_) + ",k3s1)";
}

Shape Conv1DLayer::output_shape(Shape in) const {
    if (in.second != in_ch_)
        throw ConfigError(name() + ": expects " + std::to_string(in_ch_) + " input channels");
    if (in.first < kernel)
        throw ConfigError(name() + ": input length " + std::to_string(in.first) + " below kernel size");
    return {in.first - kernel + 1, filters_};
}

const Tensor2& Conv1DLayer::forward(const Tensor2& in) {
    check_shape(in, 0, in_ch_, name());
    if (in.rows < kernel)
        throw ConfigError(name() + ": input length " + std::to_string(in.rows) + " below kernel size");
    x_ = in;
    const int out_len = in.rows - kernel + 1;
    y_.resize(out_len, filters_);
    for (int l = 0; l < out_len; ++l) {
        double* y = y_.row(l);
        const double* b = bias.row(0);
        for (int f = 0; f < filters_; ++f) y[f] = b[f];
        for (int k = 0; k < kernel; ++k) {
            const double* xr = x_.row(l + k);
            for (int c = 0; c < in_ch_; ++c) {
                const double xv = xr[c];
                const double* wr = weight.row(k * in_ch_ + c);
                for (int f = 0; f < filters_; ++f) y[f] += xv * wr[f];
            }
        }
        for (int f = 0; f < filters_; ++f) y[f] = std::max(0.0, y[f]);
    }
    have_cache_ = true;
    return y_;
}

const Tensor2& Conv1DLayer::backward(const Tensor2& grad_out) {
    require_cache(have_cache_, name());
    check_shape(grad_out, y_.rows, filters_, name() + " backward");
    gin_.resize(x_.rows, in_ch_);
    static thread_local std::vector<double> dpre;
    dpre.resize(filters_);
    double* gb = grad_bias.row(0);
    for (int l = 0; l < y_.rows; ++l) {
        const double* go = grad_out.row(l);
        const double* y = y_.row(l);
        for (int f = 0; f < filters_; ++f) {
            dpre[f] = (y[f] > 0.0) ? go[f] : 0.0;
            gb[f] += dpre[f];
        }
        for (int k = 0; k < kernel; ++k) {
            const double* xr = x_.row(l + k);
            double* gx = gin_.row(l + k);
            for (int c = 0; c < in_ch_; ++c) {
                double* gw = grad_weight.row(k * in_ch_ + c);
                const double* wr = weight.row(k * in_ch_ + c);
                double acc = 0.0;
                for (int f = 0; f < filters_; ++f) {
                    gw[f] += xr[c] * dpre[f];
                    acc += wr[f] * dpre[f];
                }
                gx[c] += acc;
            }
        }
    }
    return gin_;
}

void Conv1DLayer::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "W", &weight, &grad_weight});
    out.push_back({prefix + "b", &bias, &grad_bias});
}

// ---------------------------------------------------------------- MaxPool1D

Shape MaxPool1DLayer::output_shape(Shape in) const {
    if (in.first < pool)
        throw ConfigError("MaxPool1D: input length " + std::to_string(in.first) + " below pool size");
    return {in.first / pool, in.second};
}

const Tensor2& MaxPool1DLayer::forward(const Tensor2& in) {
    if (in.rows < pool)
        throw ConfigError("MaxPool1D: input length " + std::to_string(in.rows) + " below pool size");
    in_rows_ = in.rows;
    cols_ = in.cols;
    const int out_len = in.rows / pool;
    y_.resize(out_len, cols_);
    argmax_.resize(static_cast<std::size_t>(out_len) * cols_);
    for (int l = 0; l < out_len; ++l) {
        const double* a = in.row(2 * l);
        const double* b = in.row(2 * l + 1);
        double* y = y_.row(l);
        for (int c = 0; c < cols_; ++c) {
            if (a[c] >= b[c]) {
                y[c] = a[c];
                argmax_[static_cast<std::size_t>(l) * cols_ + c] = 2 * l;
            } else {
                y[c] = b[c];
                argmax_[static_cast<std::size_t>(l) * cols_ + c] = 2 * l + 1;
            }
        }
    }
    have_cache_ = true;
    return y_;
}

const Tensor2& MaxPool1DLayer::backward(const Tensor2& grad_out) {
    require_cache(have_cache_, "MaxPool1D");
    gin_.resize(in_rows_, cols_);
    for (int l = 0; l < y_.rows; ++l) {
        const double* go = grad_out.row(l);
        for (int c = 0; c < cols_; ++c)
            gin_(argmax_[static_cast<std::size_t>(l) * cols_ + c], c) += go[c];
    }
    return gin_;
}

// ---------------------------------------------------------------- Flatten

const Tensor2& FlattenLayer::forward(const Tensor2& in) {
    in_rows_ = in.rows;
    in_cols_ = in.cols;
    y_.rows = 1;
    y_.cols = in.rows * in.cols;
    y_.data = in.data;  // row-major flatten is a straight copy
    have_cache_ = true;
    return y_;
}

const Tensor2& FlattenLayer::backward(const Tensor2& grad_out) {
    require_cache(have_cache_, "Flatten");
    gin_.rows = in_rows_;
    gin_.cols = in_cols_;
    gin_.data = grad_out.data;
    return gin_;
}

// ---------------------------------------------------------------- GRU

GRULayer::GRULayer(int in, int units, bool return_sequence)
    : wz(in, units), wr(in, units), wh(in, units),
      uz(units, units), ur(units, units), uh(units, units),
      bz(1, units), br(1, units), bh(1, units),
      gwz(in, units), gwr(in, units), gwh(in, units),
      guz(units, units), gur(units, units), guh(units, units),
      gbz(1, units), gbr(1, units), gbh(1, units),
      in_(in), units_(units), return_sequence_(return_sequence) {}

std::string GRULayer::name() const {
    return "GRU(" + std::to_string(in_) + "," + std::to_string(units_) +
           (return_sequence_ ? ",seq)" : ",last)");
}

Shape GRULayer::output_shape(Shape in) const {
    if (in.second != in_)
        throw ConfigError(name() + ": expects " + std::to_string(in_) + " input channels");
    return {return_sequence_ ? in.first : 1, units_};
}

const Tensor2& GRULayer::forward(const Tensor2& in) {
    check_shape(in, 0, in_, name());
    const int steps = in.rows;
    x_ = in;
    h_.resize(steps, units_);
    z_.resize(steps, units_);
    r_.resize(steps, units_);
    hh_.resize(steps, units_);
    rh_.resize(steps, units_);
    static thread_local std::vector<double> zero;
    zero.assign(units_, 0.0);
    const double* h_prev = zero.data();
    for (int t = 0; t < steps; ++t) {
        const double* xt = x_.row(t);
        double* z = z_.row(t);
        double* r = r_.row(t);
        double* hh = hh_.row(t);
        double* rh = rh_.row(t);
        double* h = h_.row(t);
        for (int j = 0; j < units_; ++j) {
            z[j] = bz(0, j);
            r[j] = br(0, j);
        }
        addvm(xt, wz, z);
        addvm(h_prev, uz, z);
        addvm(xt, wr, r);
        addvm(h_prev, ur, r);
        for (int j = 0; j < units_; ++j) {
            z[j] = sigmoid(z[j]);
            r[j] = sigmoid(r[j]);
            rh[j] = r[j] * h_prev[j];
            hh[j] = bh(0, j);
        }
        addvm(xt, wh, hh);
        addvm(rh, uh, hh);
        for (int j = 0; j < units_; ++j) {
            hh[j] = std::tanh(hh[j]);
            h[j] = (1.0 - z[j]) * h_prev[j] + z[j] * hh[j];
        }
        h_prev = h;
    }
    if (return_sequence_) {
        out_ = h_;
    } else {
        out_.resize(1, units_);
        std::copy(h_.row(steps - 1), h_.row(steps - 1) + units_, out_.row(0));
    }
    have_cache_ = true;
    return out_;
}

const Tensor2& GRULayer::backward(const Tensor2& grad_out) {
    require_cache(have_cache_, name());
    const int steps = h_.rows;
    if (return_sequence_)
        check_shape(grad_out, steps, units_, name() + " backward");
    else
        check_shape(grad_out, 1, units_, name() + " backward");
    gin_.resize(steps, in_);
    static thread_local std::vector<double> dh, dh_next, daz, dar, dah, drh;
    dh.resize(units_);
    dh_next.assign(units_, 0.0);
    daz.resize(units_);
    dar.resize(units_);
    dah.resize(units_);
    drh.resize(units_);
    static thread_local std::vector<double> zero;
    zero.assign(units_, 0.0);
    for (int t = steps - 1; t >= 0; --t) {
        const double* h_prev = (t > 0) ? h_.row(t - 1) : zero.data();
        const double* z = z_.row(t);
        const double* r = r_.row(t);
        const double* hh = hh_.row(t);
        const double* xt = x_.row(t);
        for (int j = 0; j < units_; ++j) {
            dh[j] = dh_next[j];
            if (return_sequence_)
                dh[j] += grad_out(t, j);
            else if (t == steps - 1)
                dh[j] += grad_out(0, j);
        }
        for (int j = 0; j < units_; ++j) {
            const double dhh = dh[j] * z[j];
            dah[j] = dhh * (1.0 - hh[j] * hh[j]);
            const double dz = dh[j] * (hh[j] - h_prev[j]);
            daz[j] = dz * z[j] * (1.0 - z[j]);
            dh_next[j] = dh[j] * (1.0 - z[j]);
        }
        std::fill(drh.begin(), drh.end(), 0.0);
        addvm_t(dah.data(), uh, drh.data());
        for (int j = 0; j < units_; ++j) {
            const double dr = drh[j] * h_prev[j];
            dar[j] = dr * r[j] * (1.0 - r[j]);
            dh_next[j] += drh[j] * r[j];
        }
        addvm_t(daz.data(), uz, dh_next.data());
        addvm_t(dar.data(), ur, dh_next.data());
        add_outer(xt, daz.data(), gwz);
        add_outer(xt, dar.data(), gwr);
        add_outer(xt, dah.data(), gwh);
        add_outer(h_prev, daz.data(), guz);
        add_outer(h_prev, dar.data(), gur);
        add_outer(rh_.row(t), dah.data(), guh);
        for (int j = 0; j < units_; ++j) {
            gbz(0, j) += daz[j];
            gbr(0, j) += dar[j];
            gbh(0, j) += dah[j];
        }
        double* gx = gin_.row(t);
        addvm_t(daz.data(), wz, gx);
        addvm_t(dar.data(), wr, gx);
        addvm_t(dah.data(), wh, gx);
    }
    return gin_;
}

void GRULayer::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "Wz", &wz, &gwz});
    out.push_back({prefix + "Wr", &wr, &gwr});
    out.push_back({prefix + "Wh", &wh, &gwh});
    out.push_back({prefix + "Uz", &uz, &guz});
    out.push_back({prefix + "Ur", &ur, &gur});
    out.push_back({prefix + "Uh", &uh, &guh});
    out.push_back({prefix + "bz", &bz, &gbz});
    out.push_back({prefix + "br", &br, &gbr});
    out.push_back({prefix + "bh", &bh, &gbh});
}

// ---------------------------------------------------------------- LSTM

LSTMLayer::LSTMLayer(int in, int units, bool return_sequence)
    : wi(in, units), wf(in, units), wg(in, units), wo(in, units),
      ui(units, units), uf(units, units), ug(units, units), uo(units, units),
      bi(1, units), bf(1, units), bg(1, units), bo(1, units),
      gwi(in, units), gwf(in, units), gwg(in, units), gwo(in, units),
      gui(units, units), guf(units, units), gug(units, units), guo(units, units),
      gbi(1, units), gbf(1, units), gbg(1, units), gbo(1, units),
      in_(in), units_(units), return_sequence_(return_sequence) {}

std::string LSTMLayer::name() const {
    return "LSTM(" + std::to_string(in_) + "," + std::to_string(units_) +
           (return_sequence_ ? ",seq)" : ",last)");
}

Shape LSTMLayer::output_shape(Shape in) const {
    if (in.second != in_)
        throw ConfigError(name() + ": expects " + std::to_string(in_) + " input channels");
    return {return_sequence_ ? in.first : 1, units_};
}

const Tensor2& LSTMLayer::forward(const Tensor2& in) {
    check_shape(in, 0, in_, name());
    const int steps = in.rows;
    x_ = in;
    h_.resize(steps, units_);
    c_.resize(steps, units_);
    ig_.resize(steps, units_);
    fg_.resize(steps, units_);
    gg_.resize(steps, units_);
    og_.resize(steps, units_);
    tc_.resize(steps, units_);
    static thread_local std::vector<double> zero;
    zero.assign(units_, 0.0);
    const double* h_prev = zero.data();
    const double* c_prev = zero.data();
    for (int t = 0; t < steps; ++t) {
        const double* xt = x_.row(t);
        double* i = ig_.row(t);
        double* f = fg_.row(t);
        double* g = gg_.row(t);
        double* o = og_.row(t);
        double* c = c_.row(t);
        double* tc = tc_.row(t);
        double* h = h_.row(t);
        for (int j = 0; j < units_; ++j) {
            i[j] = bi(0, j);
            f[j] = bf(0, j);
            g[j] = bg(0, j);
            o[j] = bo(0, j);
        }
        addvm(xt, wi, i);
        addvm(h_prev, ui, i);
        addvm(xt, wf, f);
        addvm(h_prev, uf, f);
        addvm(xt, wg, g);
        addvm(h_prev, ug, g);
        addvm(xt, wo, o);
        addvm(h_prev, uo, o);
        for (int j = 0; j < units_; ++j) {
            i[j] = sigmoid(i[j]);
            f[j] = sigmoid(f[j]);
            g[j] = std::tanh(g[j]);
            o[j] = sigmoid(o[j]);
            c[j] = f[j] * c_prev[j] + i[j] * g[j];
            tc[j] = std::tanh(c[j]);
            h[j] = o[j] * tc[j];
        }
        h_prev = h;
        c_prev = c;
    }
    if (return_sequence_) {
        out_ = h_;
    } else {
        out_.resize(1, units_);
        std::copy(h_.row(steps - 1), h_.row(steps - 1) + units_, out_.row(0));
    }
    have_cache_ = true;
    return out_;
}

const Tensor2& LSTMLayer::backward(const Tensor2& grad_out) {
    require_cache(have_cache_, name());
    const int steps = h_.rows;
    if (return_sequence_)
        check_shape(grad_out, steps, units_, name() + " backward");
    else
        check_shape(grad_out, 1, units_, name() + " backward");
    gin_.resize(steps, in_);
    static thread_local std::vector<double> dh, dh_next, dc, dai, daf, dag, dao;
    dh.resize(units_);
    dh_next.assign(units_, 0.0);
    dc.assign(units_, 0.0);
    dai.resize(units_);
    daf.resize(units_);
    dag.resize(units_);
    dao.resize(units_);
    static thread_local std::vector<double> zero;
    zero.assign(units_, 0.0);
    for (int t = steps - 1; t >= 0; --t) {
        const double* h_prev = (t > 0) ? h_.row(t - 1) : zero.data();
        const double* c_prev = (t > 0) ? c_.row(t - 1) : zero.data();
        const double* i = ig_.row(t);
        const double* f = fg_.row(t);
        const double* g = gg_.row(t);
        const double* o = og_.row(t);
        const double* tc = tc_.row(t);
        const double* xt = x_.row(t);
        for (int j = 0; j < units_; ++j) {
            dh[j] = dh_next[j];
            if (return_sequence_)
                dh[j] += grad_out(t, j);
            else if (t == steps - 1)
                dh[j] += grad_out(0, j);
        }
        for (int j = 0; j < units_; ++j) {
            dao[j] = dh[j] * tc[j] * o[j] * (1.0 - o[j]);
            dc[j] += dh[j] * o[j] * (1.0 - tc[j] * tc[j]);
            dai[j] = dc[j] * g[j] * i[j] * (1.0 - i[j]);
            daf[j] = dc[j] * c_prev[j] * f[j] * (1.0 - f[j]);
            dag[j] = dc[j] * i[j] * (1.0 - g[j] * g[j]);
        }
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        addvm_t(dai.data(), ui, dh_next.data());
        addvm_t(daf.data(), uf, dh_next.data());
        addvm_t(dag.data(), ug, dh_next.data());
        addvm_t(dao.data(), uo, dh_next.data());
        add_outer(xt, dai.data(), gwi);
        add_outer(xt, daf.data(), gwf);
        add_outer(xt, dag.data(), gwg);
        add_outer(xt, dao.data(), gwo);
        add_outer(h_prev, dai.data(), gui);
        add_outer(h_prev, daf.data(), guf);
        add_outer(h_prev, dag.data(), gug);
        add_outer(h_prev, dao.data(), guo);
        for (int j = 0; j < units_; ++j) {
            gbi(0, j) += dai[j];
            gbf(0, j) += daf[j];
            gbg(0, j) += dag[j];
            gbo(0, j) += dao[j];
            dc[j] *= f[j];  // becomes next iteration's carried cell gradient
        }
        double* gx = gin_.row(t);
        addvm_t(dai.data(), wi, gx);
        addvm_t(daf.data(), wf, gx);
        addvm_t(dag.data(), wg, gx);
        addvm_t(dao.data(), wo, gx);
    }
    return gin_;
}

void LSTMLayer::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "Wi", &wi, &gwi});
    out.push_back({prefix + "Wf", &wf, &gwf});
    out.push_back({prefix + "Wg", &wg, &gwg});
    out.push_back({prefix + "Wo", &wo, &gwo});
    out.push_back({prefix + "Ui", &ui, &gui});
    out.push_back({prefix + "Uf", &uf, &guf});
    out.push_back({prefix + "Ug", &ug, &gug});
    out.push_back({prefix + "Uo", &uo, &guo});
    out.push_back({prefix + "bi", &bi, &gbi});
    out.push_back({prefix + "bf", &bf, &gbf});
    out.push_back({prefix + "bg", &bg, &gbg});
    out.push_back({prefix + "bo", &bo, &gbo});
}

}  // namespace tslab
