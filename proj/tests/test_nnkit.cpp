#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <unistd.h>

#include "tslab/errors.hpp"
#include "tslab/grad_check.hpp"
#include "tslab/network.hpp"
#include "tslab/optimizer.hpp"
#include "tslab/qnets.hpp"
#include "tslab/weights_io.hpp"

using namespace tslab;

namespace {

Tensor2 random_window(int rows, int cols, std::uint64_t seed, double scale = 0.2) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    Tensor2 t(rows, cols);
    for (double& v : t.data) v = n(rng);
    return t;
}

// A dense layer whose backward flips the weight-gradient sign. Used as the
// gradient checker's negative control.
class BrokenDense : public Layer {
public:
    BrokenDense(int in, int out) : inner_(in, out, Activation::linear) {}
    const Tensor2& forward(const Tensor2& in) override { return inner_.forward(in); }
    const Tensor2& backward(const Tensor2& g) override {
        const Tensor2& gin = inner_.backward(g);
        for (double& v : inner_.grad_weight.data) v = -v;
        return gin;
    }
    void collect_params(const std::string& p, std::vector<ParamRef>& out) override {
        inner_.collect_params(p, out);
    }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<BrokenDense>(*this); }
    std::string name() const override { return "BrokenDense"; }
    Shape output_shape(Shape in) const override { return inner_.output_shape(in); }

private:
    DenseLayer inner_;
};

}  // namespace

TEST_CASE("forward: all-zero weights give zero Q values") {
    Network net = build(parse_spec("MLP-16x4", 1), 7);
    for (auto& p : net.params()) p.value->zero();
    const Tensor2& q = net.forward(random_window(40, 1, 3));
    REQUIRE(q.rows == 1);
    REQUIRE(q.cols == 3);
    for (double v : q.data) CHECK(v == 0.0);
}

TEST_CASE("forward: dense direct substitution") {
    DenseLayer d(2, 1, Activation::linear);
    d.weight(0, 0) = 1.0;
    d.weight(1, 0) = 1.0;
    d.bias(0, 0) = 0.0;
    Tensor2 x(1, 2, {3.0, 4.0});
    const Tensor2& y = d.forward(x);
    CHECK(y(0, 0) == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("forward: MLP-16x4 matches an independent matrix-math oracle") {
    const NetSpec spec = parse_spec("MLP-16x4", 1);
    Network net = build(spec, 12345);
    const Tensor2 window = random_window(40, 1, 99);
    const Tensor2& q = net.forward(window);

    // Straight-line re-implementation from the raw parameter tensors.
    auto params = net.params();
    std::vector<double> x = window.data;  // flattened 40x1
    for (std::size_t layer = 1; layer <= 5; ++layer) {
        const Tensor2* w = nullptr;
        const Tensor2* b = nullptr;
        for (const auto& p : params) {
            if (p.name == "layer" + std::to_string(layer) + ".W") w = p.value;
            if (p.name == "layer" + std::to_string(layer) + ".b") b = p.value;
        }
        REQUIRE(w != nullptr);
        REQUIRE(b != nullptr);
        std::vector<double> y(w->cols);
        for (int j = 0; j < w->cols; ++j) {
            double acc = (*b)(0, j);
            for (int i = 0; i < w->rows; ++i) acc += x[i] * (*w)(i, j);
            y[j] = (layer < 5 && acc < 0.0) ? 0.0 : acc;  // relu except head
        }
        x = std::move(y);
    }
    REQUIRE(x.size() == 3);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(q.data[a] - x[a]) < 1e-12);
}

TEST_CASE("forward is deterministic") {
    Network net = build(parse_spec("GRU-8x3", 2), 5);
    const Tensor2 window = random_window(40, 2, 8);
    const Tensor2 q1 = net.forward(window);
    const Tensor2 q2 = net.forward(window);
    CHECK(q1.data == q2.data);
}

TEST_CASE("forward: shape mismatch is a configuration error") {
    Network net = build(parse_spec("MLP-16x4", 1), 7);
    CHECK_THROWS_AS(net.forward(random_window(40, 2, 3)), ConfigError);
}

TEST_CASE("forward: non-finite parameters surface as a numeric error naming the layer") {
    Network net = build(parse_spec("MLP-16x4", 1), 7);
    for (auto& p : net.params())
        if (p.name.ends_with(".b")) {
            p.value->data[0] = std::numeric_limits<double>::infinity();
            break;
        }
    try {
        net.forward(random_window(40, 1, 3));
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("Dense") != std::string::npos);
    }
}

TEST_CASE("backward: zero output gradient gives zero parameter gradients") {
    Network net = build(parse_spec("LSTM-8x3", 1), 21);
    net.zero_grads();
    net.forward(random_window(40, 1, 4));
    Tensor2 zero(1, 3);
    net.backward(zero);
    for (auto& p : net.params())
        for (double g : p.grad->data) CHECK(g == 0.0);
}

TEST_CASE("backward: dense 1-D hand calculus") {
    // y = w x, loss 0.5 (y - t)^2, dL/dw = (y - t) x
    DenseLayer d(1, 1, Activation::linear);
    d.weight(0, 0) = 2.0;
    Tensor2 x(1, 1, {3.0});
    const double t = 1.0;
    const Tensor2& y = d.forward(x);
    Tensor2 g(1, 1, {y(0, 0) - t});
    d.backward(g);
    CHECK(d.grad_weight(0, 0) == doctest::Approx((y(0, 0) - t) * 3.0).epsilon(1e-15));
}

TEST_CASE("backward: missing cache is a usage error") {
    DenseLayer d(2, 2, Activation::relu);
    Tensor2 g(1, 2);
    CHECK_THROWS_AS(d.backward(g), ConfigError);
}

TEST_CASE("gradient check: every layer kind in isolation") {
    struct Case {
        const char* label;
        Network net;
        Tensor2 input;
        double tol;
    };
    std::vector<Case> cases;
    {
        Network n;
        n.add(std::make_unique<FlattenLayer>());
        n.add(std::make_unique<DenseLayer>(12, 7, Activation::relu));
        n.add(std::make_unique<DenseLayer>(7, 3, Activation::linear));
        cases.push_back({"dense", std::move(n), random_window(6, 2, 31), 1e-6});
    }
    {
        Network n;
        n.add(std::make_unique<Conv1DLayer>(2, 4));
        n.add(std::make_unique<MaxPool1DLayer>());
        n.add(std::make_unique<FlattenLayer>());
        n.add(std::make_unique<DenseLayer>(4 * 4, 3, Activation::linear));
        cases.push_back({"conv+pool", std::move(n), random_window(10, 2, 32), 1e-5});
    }
    {
        Network n;
        n.add(std::make_unique<GRULayer>(2, 5, true));
        n.add(std::make_unique<GRULayer>(5, 5, false));
        n.add(std::make_unique<DenseLayer>(5, 3, Activation::linear));
        cases.push_back({"gru", std::move(n), random_window(12, 2, 33), 1e-5});
    }
    {
        Network n;
        n.add(std::make_unique<LSTMLayer>(2, 5, true));
        n.add(std::make_unique<LSTMLayer>(5, 5, false));
        n.add(std::make_unique<DenseLayer>(5, 3, Activation::linear));
        cases.push_back({"lstm", std::move(n), random_window(12, 2, 34), 1e-5});
    }
    for (auto& c : cases) {
        // seeded weights for the hand-assembled stacks
        std::mt19937_64 rng(77);
        for (auto& p : c.net.params()) {
            std::uniform_real_distribution<double> u(-0.4, 0.4);
            for (double& v : p.value->data) v = u(rng);
        }
        const auto report = grad_check(c.net, c.input, c.tol, 5);
        INFO(c.label << ": " << report.to_string());
        CHECK(report.passed);
    }
}

TEST_CASE("gradient check: one assembled architecture per family") {
    for (const char* name : {"MLP-16x4", "GRU-8x3", "LSTM-8x3", "CNN-8x3"}) {
        for (std::uint64_t seed : {1ULL, 2ULL}) {
            Network net = build(parse_spec(name, 2), seed);
            const auto report = grad_check(net, random_window(40, 2, seed + 50), 1e-4, seed);
            INFO(name << " seed " << seed << ": " << report.to_string());
            CHECK(report.passed);
        }
    }
}

TEST_CASE("gradient check: sign-flipped backward fails") {
    Network net;
    net.add(std::make_unique<FlattenLayer>());
    net.add(std::make_unique<BrokenDense>(8, 3));
    std::mt19937_64 rng(9);
    for (auto& p : net.params()) {
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (double& v : p.value->data) v = u(rng);
    }
    const auto report = grad_check(net, random_window(4, 2, 10), 1e-4, 3);
    CHECK_FALSE(report.passed);
}

TEST_CASE("count_params: reference examples") {
    CHECK(build(parse_spec("MLP-16x4", 1)).count_params() == 1523);
    CHECK(build(parse_spec("GRU-8x3", 1)).count_params() == 1227);
    CHECK(build(parse_spec("CNN-8x3", 2)).count_params() == 2907);
}

TEST_CASE("optimizer: sgd update rule") {
    Network net;
    net.add(std::make_unique<DenseLayer>(1, 1, Activation::linear));
    auto params = net.params();
    params[0].value->data[0] = 1.0;
    params[0].grad->data[0] = 2.0;
    Optimizer opt({OptAlgo::sgd, 0.1});
    opt.step(params);
    CHECK(params[0].value->data[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(params[0].grad->data[0] == 0.0);  // gradients cleared
    CHECK(opt.step_count() == 1);
}

TEST_CASE("optimizer: adam first step moves by about the learning rate") {
    for (double g : {0.001, 0.5, 40.0}) {
        Network net;
        net.add(std::make_unique<DenseLayer>(1, 1, Activation::linear));
        auto params = net.params();
        params[0].value->data[0] = 1.0;
        params[0].grad->data[0] = g;
        OptimizerConfig cfg;
        Optimizer opt(cfg);
        opt.step(params);
        CHECK(std::abs(std::abs(1.0 - params[0].value->data[0]) - cfg.learning_rate) < 1e-5);
    }
}

TEST_CASE("optimizer: zero gradient is a fixed point") {
    for (OptAlgo algo : {OptAlgo::sgd, OptAlgo::adam}) {
        Network net = build(parse_spec("MLP-16x4", 1), 4);
        auto params = net.params();
        const std::vector<double> before = params[0].value->data;
        net.zero_grads();
        OptimizerConfig cfg;
        cfg.algo = algo;
        Optimizer opt(cfg);
        opt.step(params);
        CHECK(params[0].value->data == before);
    }
}

TEST_CASE("optimizer: non-finite gradient is a numeric error") {
    Network net;
    net.add(std::make_unique<DenseLayer>(1, 1, Activation::linear));
    auto params = net.params();
    params[0].grad->data[0] = std::numeric_limits<double>::quiet_NaN();
    Optimizer opt({});
    CHECK_THROWS_AS(opt.step(params), NumericError);
}

TEST_CASE("weights: save/load round-trips Q outputs bit-exactly") {
    const NetSpec spec = parse_spec("GRU-8x3", 2);
    Network net = build(spec, 77);
    const std::string path = "roundtrip.tsqw";
    save_weights(net, spec, path);
    Network loaded = load_weights(path, spec);
    for (int i = 0; i < 100; ++i) {
        const Tensor2 w = random_window(40, 2, 1000 + i);
        const Tensor2 q1 = net.forward(w);
        const Tensor2 q2 = loaded.forward(w);
        CHECK(q1.data == q2.data);
    }
    std::remove(path.c_str());
}

TEST_CASE("weights: truncated file is a load error") {
    const NetSpec spec = parse_spec("MLP-16x4", 1);
    Network net = build(spec, 3);
    const std::string path = "truncated.tsqw";
    save_weights(net, spec, path);
    {
        std::FILE* f = std::fopen(path.c_str(), "rb+");
        REQUIRE(f);
        std::fseek(f, 0, SEEK_END);
        const long size = std::ftell(f);
        std::fclose(f);
        REQUIRE(truncate(path.c_str(), size / 2) == 0);
    }
    CHECK_THROWS_AS(load_weights(path), IoError);
    std::remove(path.c_str());
}

TEST_CASE("weights: loading into a different spec is a shape error") {
    const NetSpec mlp = parse_spec("MLP-16x4", 1);
    Network net = build(mlp, 3);
    const std::string path = "mismatch.tsqw";
    save_weights(net, mlp, path);
    CHECK_THROWS_AS(load_weights(path, parse_spec("GRU-8x3", 1)), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("conv/pool length composition for CNN-x3 on window 40") {
    Shape s{40, 1};
    Conv1DLayer c1(1, 8);
    MaxPool1DLayer p;
    s = c1.output_shape(s);
    CHECK(s.first == 38);
    s = p.output_shape(s);
    CHECK(s.first == 19);
    Conv1DLayer c2(8, 8);
    s = c2.output_shape(s);
    CHECK(s.first == 17);
    s = p.output_shape(s);
    CHECK(s.first == 8);
    s = c2.output_shape(s);
    CHECK(s.first == 6);
    s = p.output_shape(s);
    CHECK(s.first == 3);
}

TEST_CASE("recurrent parameter-count formulas") {
    GRULayer gru(5, 9, true);
    std::vector<ParamRef> refs;
    gru.collect_params("", refs);
    std::size_t n = 0;
    for (auto& r : refs) n += r.value->size();
    CHECK(n == 3u * (5 * 9 + 9 * 9 + 9));

    LSTMLayer lstm(5, 9, true);
    refs.clear();
    lstm.collect_params("", refs);
    n = 0;
    for (auto& r : refs) n += r.value->size();
    CHECK(n == 4u * (5 * 9 + 9 * 9 + 9));
}
