#include "tslab/games.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tslab/errors.hpp"

namespace tslab {

std::string game_kind_name(GameKind k) {
    return k == GameKind::univariate ? "univariate" : "bivariate";
}

GameKind parse_game_kind(const std::string& s) {
    if (s == "univariate") return GameKind::univariate;
    if (s == "bivariate") return GameKind::bivariate;
    throw ConfigError("unknown game kind '" + s + "' (expected univariate or bivariate)");
}

ActionMask valid_actions(bool holding) {
    if (holding) return {true, false, true};  // CASH, HOLD
    return {true, true, false};               // CASH, BUY
}

namespace {

double clamp_positive(double v) { return v < 1.0 ? 1.0 : v; }

}  // namespace

EpisodeData generate_univariate(const GameConfig& config, std::uint64_t seed) {
    if (config.kind != GameKind::univariate)
        throw ConfigError("generate_univariate: config kind is not univariate");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    EpisodeData ep;
    ep.kind = GameKind::univariate;
    ep.seed = seed;
    for (int k = 0; k < config.n_short_waves; ++k) {
        ep.wave_periods.push_back(
            std::uniform_real_distribution<double>(config.short_period_min, config.short_period_max)(rng));
        ep.wave_amps.push_back(
            std::uniform_real_distribution<double>(config.short_amp_min, config.short_amp_max)(rng));
        ep.wave_phases.push_back(phase(rng));
    }
    ep.long_period =
        std::uniform_real_distribution<double>(config.long_period_min, config.long_period_max)(rng);
    ep.long_amp =
        std::uniform_real_distribution<double>(config.long_amp_min, config.long_amp_max)(rng);
    ep.long_phase = phase(rng);

    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    const int len = config.series_length();
    ep.price.resize(len);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int t = 0; t < len; ++t) {
        double v = config.base_offset;
        for (std::size_t k = 0; k < ep.wave_periods.size(); ++k)
            v += ep.wave_amps[k] * std::sin(two_pi * t / ep.wave_periods[k] + ep.wave_phases[k]);
        v += ep.long_amp * std::sin(two_pi * t / ep.long_period + ep.long_phase);
        if (config.noise_sigma > 0.0) v += noise(rng);
        ep.price[t] = clamp_positive(v);
    }
    return ep;
}

EpisodeData generate_bivariate(const GameConfig& config, std::uint64_t seed) {
    if (config.kind != GameKind::bivariate)
        throw ConfigError("generate_bivariate: config kind is not bivariate");
    std::mt19937_64 rng(seed);

    EpisodeData ep;
    ep.kind = GameKind::bivariate;
    ep.seed = seed;
    ep.lead = std::uniform_int_distribution<int>(config.lead_min, config.lead_max)(rng);

    const int len = config.series_length();
    const int full_len = len + ep.lead;
    std::vector<double> full(full_len);
    double p = std::uniform_real_distribution<double>(config.start_min, config.start_max)(rng);
    std::uniform_int_distribution<int> gap(config.jump_gap_min, config.jump_gap_max);
    std::uniform_real_distribution<double> amp(config.jump_amp_min, config.jump_amp_max);
    int next_jump = gap(rng);
    for (int t = 0; t < full_len; ++t) {
        if (t == next_jump) {
            const double a = amp(rng);
            p += a;
            if (p < config.price_floor) p = config.price_floor;
            ep.jump_times.push_back(t);
            ep.jump_amps.push_back(a);
            next_jump = t + gap(rng);
        }
        full[t] = p;
    }

    std::normal_distribution<double> noise(0.0, config.signal_sigma);
    ep.price.assign(full.begin(), full.begin() + len);
    ep.signal.resize(len);
    for (int t = 0; t < len; ++t) {
        double s = full[t + ep.lead];
        if (config.signal_sigma > 0.0) s += noise(rng);
        ep.signal[t] = clamp_positive(s);
    }
    return ep;
}

EpisodeData generate_episode(const GameConfig& config, std::uint64_t seed) {
    return config.kind == GameKind::univariate ? generate_univariate(config, seed)
                                               : generate_bivariate(config, seed);
}

StepOutcome step(const EpisodeData& episode, int t, bool holding, Action action,
                 const GameConfig& config) {
    if (t < config.first_decision() || t > config.last_decision())
        throw std::invalid_argument("step: decision index " + std::to_string(t) +
                                    " outside [" + std::to_string(config.first_decision()) + ", " +
                                    std::to_string(config.last_decision()) + "]");
    if (!valid_actions(holding)[static_cast<int>(action)])
        throw std::invalid_argument(std::string("step: invalid action ") + action_name(action) +
                                    (holding ? " while holding" : " while flat"));
    StepOutcome out;
    const double dp = episode.price[t + 1] - episode.price[t];
    switch (action) {
        case Action::cash: out.reward = 0.0; break;
        case Action::buy: out.reward = dp - config.cost; break;
        case Action::hold: out.reward = dp; break;
    }
    out.next_holding = (action == Action::buy || action == Action::hold);
    out.next_valid = valid_actions(out.next_holding);
    out.done = (t == config.last_decision());
    return out;
}

Tensor2 observe(const EpisodeData& episode, int t, const GameConfig& config) {
    const int w = config.window;
    if (t < w - 1 || t + 1 > static_cast<int>(episode.price.size()))
        throw std::invalid_argument("observe: index " + std::to_string(t) +
                                    " outside observable range");
    const int channels = config.channels();
    Tensor2 out(w, channels);
    for (int c = 0; c < channels; ++c) {
        const std::vector<double>& series = (c == 0) ? episode.price : episode.signal;
        double mean = 0.0;
        for (int i = 0; i < w; ++i) mean += series[t - w + 1 + i];
        mean /= w;
        for (int i = 0; i < w; ++i) out(i, c) = series[t - w + 1 + i] / mean - 1.0;
    }
    return out;
}

double episode_pnl(const std::vector<double>& rewards) {
    double s = 0.0;
    for (double r : rewards) s += r;
    return s;
}

}  // namespace tslab
