#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslab/network.hpp"

namespace tslab {

struct GradCheckEntry {
    std::string layer;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::vector<GradCheckEntry> per_layer;

    std::string to_string() const;
};

// Compares analytic gradients of a random linear probe of the network output
// against central finite differences. Relative error uses a unit floor:
// |a-n| / max(1, |a|, |n|). With max_entries_per_tensor > 0, large tensors
// are checked on a seeded random subset of that many entries; every tensor
// is still touched.
GradCheckReport grad_check(Network& net, const Tensor2& input, double tolerance,
                           std::uint64_t probe_seed = 0, double h = 1e-5,
                           int max_entries_per_tensor = 0);

}  // namespace tslab
