#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslab/dqn.hpp"
#include "tslab/games.hpp"

namespace tslab {

// One config file drives every CLI command. Command-line flags override
// individual fields after parsing.
struct RunConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    GameConfig game;
    std::vector<std::string> specs;
    Hyperparams hyper;
};

// Parses and validates a config file. Unknown keys and malformed fields are
// rejected with a ConfigError naming the offending key.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text, const std::string& origin);

}  // namespace tslab
