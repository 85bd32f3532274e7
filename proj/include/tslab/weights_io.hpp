#pragma once

#include <string>

#include "tslab/network.hpp"
#include "tslab/qnets.hpp"

namespace tslab {

// Versioned binary weight container: magic "TSQW", format version, the
// architecture name with window/channel widths, then each named parameter
// tensor as little-endian 64-bit floats. Round-trips are bit-exact.
inline constexpr char kWeightMagic[4] = {'T', 'S', 'Q', 'W'};
inline constexpr std::uint32_t kWeightVersion = 1;

void save_weights(Network& net, const NetSpec& spec, const std::string& path);

// Reads the spec from the file header. Throws IoError on unreadable or
// truncated files, ConfigError on version or shape mismatches.
struct LoadedNetwork {
    NetSpec spec;
    Network net;
};
LoadedNetwork load_weights(const std::string& path);

// Same, but requires the stored spec to equal `expected`.
Network load_weights(const std::string& path, const NetSpec& expected);

}  // namespace tslab
