#include "tslab/qnets.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "tslab/errors.hpp"

namespace tslab {

namespace {

constexpr int kActions = 3;
constexpr int kCnnDense1 = 48;
constexpr int kCnnDense2 = 24;

void init_weights(Network& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& p : net.params()) {
        const std::string local = p.name.substr(p.name.find('.') + 1);
        if (local.empty()) continue;
        if (local[0] == 'b') continue;  // biases stay zero
        const double fan_in = p.value->rows;
        const double fan_out = p.value->cols;
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (double& v : p.value->data) v = u(rng);
    }
}

}  // namespace

std::string family_name(NetFamily f) {
    switch (f) {
        case NetFamily::mlp: return "MLP";
        case NetFamily::gru: return "GRU";
        case NetFamily::lstm: return "LSTM";
        case NetFamily::cnn: return "CNN";
    }
    return "?";
}

std::string NetSpec::format() const {
    return family_name(family) + "-" + std::to_string(width) + "x" + std::to_string(depth);
}

NetSpec parse_spec(const std::string& name, int channels, int window) {
    if (channels != 1 && channels != 2)
        throw ConfigError("parse_spec: channels must be 1 or 2, got " + std::to_string(channels));
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    const auto fail = [&] {
        throw ConfigError("parse_spec: malformed architecture name '" + name +
                          "'; expected FAMILY-WxL with FAMILY one of MLP, GRU, LSTM, CNN");
    };
    const auto dash = upper.find('-');
    if (dash == std::string::npos) fail();
    const std::string fam = upper.substr(0, dash);
    NetSpec spec;
    if (fam == "MLP")
        spec.family = NetFamily::mlp;
    else if (fam == "GRU")
        spec.family = NetFamily::gru;
    else if (fam == "LSTM")
        spec.family = NetFamily::lstm;
    else if (fam == "CNN")
        spec.family = NetFamily::cnn;
    else
        fail();
    const auto x = upper.find('X', dash + 1);
    if (x == std::string::npos) fail();
    const std::string w = upper.substr(dash + 1, x - dash - 1);
    const std::string d = upper.substr(x + 1);
    const auto all_digits = [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(),
                                         [](unsigned char c) { return std::isdigit(c); });
    };
    if (!all_digits(w) || !all_digits(d)) fail();
    spec.width = std::stoi(w);
    spec.depth = std::stoi(d);
    if (spec.width < 1 || spec.depth < 1)
        throw ConfigError("parse_spec: width and depth must be >= 1 in '" + name + "'");
    spec.window = window;
    spec.channels = channels;
    return spec;
}

Network build(const NetSpec& spec, std::uint64_t init_seed) {
    Network net;
    net.set_input_shape(spec.window, spec.channels);
    const int w = spec.width;
    switch (spec.family) {
        case NetFamily::mlp: {
            net.add(std::make_unique<FlattenLayer>());
            int in = spec.window * spec.channels;
            for (int l = 0; l < spec.depth; ++l) {
                net.add(std::make_unique<DenseLayer>(in, w, Activation::relu));
                in = w;
            }
            net.add(std::make_unique<DenseLayer>(in, kActions, Activation::linear));
            break;
        }
        case NetFamily::gru:
        case NetFamily::lstm: {
            int in = spec.channels;
            for (int l = 0; l < spec.depth; ++l) {
                const bool seq = l + 1 < spec.depth;
                if (spec.family == NetFamily::gru)
                    net.add(std::make_unique<GRULayer>(in, w, seq));
                else
                    net.add(std::make_unique<LSTMLayer>(in, w, seq));
                in = w;
            }
            net.add(std::make_unique<DenseLayer>(w, w, Activation::relu));
            net.add(std::make_unique<DenseLayer>(w, w, Activation::relu));
            net.add(std::make_unique<DenseLayer>(w, kActions, Activation::linear));
            break;
        }
        case NetFamily::cnn: {
            int len = spec.window;
            int ch = spec.channels;
            for (int l = 0; l < spec.depth; ++l) {
                if (len < Conv1DLayer::kernel || (len - Conv1DLayer::kernel + 1) / 2 < 1)
                    throw ConfigError("build: " + spec.format() + " collapses sequence length to " +
                                      std::to_string((len - Conv1DLayer::kernel + 1) / 2) +
                                      " at conv block " + std::to_string(l + 1));
                net.add(std::make_unique<Conv1DLayer>(ch, w));
                len = len - Conv1DLayer::kernel + 1;
                net.add(std::make_unique<MaxPool1DLayer>());
                len /= 2;
                ch = w;
            }
            net.add(std::make_unique<FlattenLayer>());
            net.add(std::make_unique<DenseLayer>(len * w, kCnnDense1, Activation::relu));
            net.add(std::make_unique<DenseLayer>(kCnnDense1, kCnnDense2, Activation::relu));
            net.add(std::make_unique<DenseLayer>(kCnnDense2, kActions, Activation::linear));
            break;
        }
    }
    init_weights(net, init_seed);
    return net;
}

const std::vector<std::string>& reference_spec_names() {
    static const std::vector<std::string> names = {
        "MLP-16x4", "MLP-16x5", "MLP-32x4", "MLP-32x5",
        "GRU-8x3",  "GRU-16x3", "GRU-16x2", "GRU-32x3",
        "LSTM-8x3", "LSTM-16x3", "LSTM-16x2", "LSTM-32x3",
        "CNN-8x3",  "CNN-16x3", "CNN-16x2", "CNN-32x3",
    };
    return names;
}

const std::vector<std::array<std::size_t, 2>>& reference_param_counts() {
    static const std::vector<std::array<std::size_t, 2>> counts = {
        {1523, 2163},  {1795, 2435},  {4579, 5859},   {5635, 6915},
        {1227, 1251},  {4627, 4675},  {3043, 3091},   {17955, 18051},
        {1579, 1611},  {5971, 6035},  {3859, 3923},   {23203, 23331},
        {2883, 2907},  {5235, 5283},  {8291, 8339},   {12243, 12339},
    };
    return counts;
}

std::vector<ParamTableRow> param_table() {
    std::vector<ParamTableRow> rows;
    for (const auto& name : reference_spec_names()) {
        ParamTableRow row;
        row.spec = name;
        row.univariate_params = build(parse_spec(name, 1)).count_params();
        row.bivariate_params = build(parse_spec(name, 2)).count_params();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tslab
