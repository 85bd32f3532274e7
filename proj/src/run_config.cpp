#include "tslab/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tslab/errors.hpp"
#include "tslab/qnets.hpp"

namespace tslab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!known.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
}

double get_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("config: '" + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
    return obj[key].get<int>();
}

void get_range(const json& obj, const std::string& key, double& lo, double& hi) {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("config: '" + key + "' must be a [min, max] pair");
    lo = v[0].get<double>();
    hi = v[1].get<double>();
    if (lo > hi) throw ConfigError("config: '" + key + "' has min > max");
}

void get_int_range(const json& obj, const std::string& key, int& lo, int& hi) {
    double dlo = lo, dhi = hi;
    get_range(obj, key, dlo, dhi);
    lo = static_cast<int>(dlo);
    hi = static_cast<int>(dhi);
}

GameConfig parse_game(const json& obj) {
    reject_unknown(obj, {"kind", "steps", "window", "cost", "n_short_waves", "short_period",
                         "short_amp", "long_period", "long_amp", "base_offset", "noise_sigma",
                         "jump_gap", "jump_amp", "lead", "signal_sigma", "start_price",
                         "price_floor"},
                   "game");
    GameConfig g;
    if (obj.contains("kind")) {
        if (!obj["kind"].is_string()) throw ConfigError("config: 'game.kind' must be a string");
        g.kind = parse_game_kind(obj["kind"].get<std::string>());
    }
    g.steps = get_int(obj, "steps", g.steps);
    g.window = get_int(obj, "window", g.window);
    g.cost = get_number(obj, "cost", g.cost);
    g.n_short_waves = get_int(obj, "n_short_waves", g.n_short_waves);
    get_range(obj, "short_period", g.short_period_min, g.short_period_max);
    get_range(obj, "short_amp", g.short_amp_min, g.short_amp_max);
    get_range(obj, "long_period", g.long_period_min, g.long_period_max);
    get_range(obj, "long_amp", g.long_amp_min, g.long_amp_max);
    g.base_offset = get_number(obj, "base_offset", g.base_offset);
    g.noise_sigma = get_number(obj, "noise_sigma", g.noise_sigma);
    get_int_range(obj, "jump_gap", g.jump_gap_min, g.jump_gap_max);
    get_range(obj, "jump_amp", g.jump_amp_min, g.jump_amp_max);
    get_int_range(obj, "lead", g.lead_min, g.lead_max);
    g.signal_sigma = get_number(obj, "signal_sigma", g.signal_sigma);
    get_range(obj, "start_price", g.start_min, g.start_max);
    g.price_floor = get_number(obj, "price_floor", g.price_floor);

    if (g.steps < 1) throw ConfigError("config: 'game.steps' must be positive");
    if (g.window < 2) throw ConfigError("config: 'game.window' must be at least 2");
    if (g.cost < 0) throw ConfigError("config: 'game.cost' must be non-negative");
    if (g.n_short_waves < 0) throw ConfigError("config: 'game.n_short_waves' must be >= 0");
    if (g.noise_sigma < 0 || g.signal_sigma < 0)
        throw ConfigError("config: noise sigmas must be non-negative");
    if (g.short_period_min <= 0 || g.long_period_min <= 0)
        throw ConfigError("config: wave periods must be positive");
    if (g.jump_gap_min < 1) throw ConfigError("config: 'game.jump_gap' must start at >= 1");
    if (g.lead_min < 0) throw ConfigError("config: 'game.lead' must be non-negative");
    return g;
}

Hyperparams parse_hyper(const json& obj) {
    reject_unknown(obj, {"gamma", "train_episodes", "test_episodes", "epsilon_start",
                         "epsilon_end", "epsilon_decay_episodes", "batch_size",
                         "memory_capacity", "learn_start", "optimizer", "learning_rate"},
                   "hyper");
    Hyperparams h;
    h.gamma = get_number(obj, "gamma", h.gamma);
    h.train_episodes = get_int(obj, "train_episodes", h.train_episodes);
    h.test_episodes = get_int(obj, "test_episodes", h.test_episodes);
    h.epsilon_start = get_number(obj, "epsilon_start", h.epsilon_start);
    h.epsilon_end = get_number(obj, "epsilon_end", h.epsilon_end);
    h.epsilon_decay_episodes = get_int(obj, "epsilon_decay_episodes", h.epsilon_decay_episodes);
    h.batch_size = get_int(obj, "batch_size", h.batch_size);
    h.memory_capacity = static_cast<std::size_t>(
        get_int(obj, "memory_capacity", static_cast<int>(h.memory_capacity)));
    h.learn_start =
        static_cast<std::size_t>(get_int(obj, "learn_start", static_cast<int>(h.learn_start)));
    if (obj.contains("optimizer")) {
        const std::string o = obj["optimizer"].get<std::string>();
        if (o == "sgd")
            h.optimizer.algo = OptAlgo::sgd;
        else if (o == "adam")
            h.optimizer.algo = OptAlgo::adam;
        else
            throw ConfigError("config: 'hyper.optimizer' must be 'sgd' or 'adam'");
    }
    h.optimizer.learning_rate = get_number(obj, "learning_rate", h.optimizer.learning_rate);

    if (h.gamma < 0.0 || h.gamma > 1.0) throw ConfigError("config: 'hyper.gamma' must be in [0,1]");
    for (double e : {h.epsilon_start, h.epsilon_end})
        if (e < 0.0 || e > 1.0) throw ConfigError("config: epsilon values must be in [0,1]");
    if (h.train_episodes < 0 || h.test_episodes < 0)
        throw ConfigError("config: episode counts must be non-negative");
    if (h.batch_size < 1) throw ConfigError("config: 'hyper.batch_size' must be positive");
    if (h.memory_capacity < 1) throw ConfigError("config: 'hyper.memory_capacity' must be positive");
    if (h.optimizer.learning_rate <= 0.0)
        throw ConfigError("config: 'hyper.learning_rate' must be positive");
    return h;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + origin + " is not valid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: " + origin + " must be a JSON object");
    reject_unknown(root, {"seed", "out_dir", "game", "specs", "hyper"}, "top level");

    RunConfig cfg;
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer())
            throw ConfigError("config: 'seed' must be an integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("out_dir")) {
        if (!root["out_dir"].is_string()) throw ConfigError("config: 'out_dir' must be a string");
        cfg.out_dir = root["out_dir"].get<std::string>();
    }
    if (root.contains("game")) cfg.game = parse_game(root["game"]);
    if (root.contains("hyper")) cfg.hyper = parse_hyper(root["hyper"]);
    if (root.contains("specs")) {
        if (!root["specs"].is_array()) throw ConfigError("config: 'specs' must be an array");
        for (const auto& s : root["specs"]) {
            if (!s.is_string()) throw ConfigError("config: 'specs' entries must be strings");
            // validates the name now so bad specs fail before any work
            parse_spec(s.get<std::string>(), cfg.game.channels(), cfg.game.window);
            cfg.specs.push_back(s.get<std::string>());
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_run_config(buf.str(), "'" + path + "'");
}

}  // namespace tslab
