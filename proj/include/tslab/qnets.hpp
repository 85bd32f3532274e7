#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tslab/network.hpp"

namespace tslab {

enum class NetFamily { mlp, gru, lstm, cnn };

std::string family_name(NetFamily f);

// Architecture descriptor parsed from names like "GRU-8x3".
struct NetSpec {
    NetFamily family = NetFamily::mlp;
    int width = 1;   // H (MLP), C (GRU/LSTM) or F (CNN)
    int depth = 1;   // L
    int window = 40;
    int channels = 1;

    std::string format() const;  // "GRU-8x3"
    bool operator==(const NetSpec&) const = default;
};

// Parses FAMILY-WxL (case-insensitive). Throws ConfigError on malformed
// names, listing the valid families.
NetSpec parse_spec(const std::string& name, int channels = 1, int window = 40);

// Assembles the network for a spec. All hidden activations are rectifiers;
// the head is a 3-unit linear dense layer. Weights are seeded Glorot-uniform,
// biases zero. Throws ConfigError when a CNN depth collapses the sequence
// length below what conv/pool stages need.
Network build(const NetSpec& spec, std::uint64_t init_seed = 0);

// The 16 architecture names used in the reference comparison, in table order.
const std::vector<std::string>& reference_spec_names();

struct ParamTableRow {
    std::string spec;
    std::size_t univariate_params = 0;
    std::size_t bivariate_params = 0;
};

// Parameter counts for all reference specs at both input widths.
std::vector<ParamTableRow> param_table();

// Expected counts (univariate, bivariate) used to verify param_table.
const std::vector<std::array<std::size_t, 2>>& reference_param_counts();

}  // namespace tslab
