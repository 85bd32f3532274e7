#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tslab/tensor.hpp"

namespace tslab {

enum class GameKind { univariate, bivariate };

std::string game_kind_name(GameKind k);
GameKind parse_game_kind(const std::string& s);

struct GameConfig {
    GameKind kind = GameKind::univariate;
    int steps = 180;   // decisions per episode
    int window = 40;   // observation length
    double cost = 3.3;  // cost applied to BUY

    // Univariate: superposed sine waves plus noise on a positive base level.
    int n_short_waves = 2;
    double short_period_min = 10.0, short_period_max = 40.0;
    double short_amp_min = 5.0, short_amp_max = 80.0;
    double long_period_min = 80.0, long_period_max = 200.0;
    double long_amp_min = 20.0, long_amp_max = 80.0;
    double base_offset = 200.0;
    double noise_sigma = 2.0;

    // Bivariate: stepwise price with a noisy leading signal.
    int jump_gap_min = 15, jump_gap_max = 30;
    double jump_amp_min = -30.0, jump_amp_max = 30.0;
    int lead_min = 10, lead_max = 30;
    double signal_sigma = 5.0;
    double start_min = 100.0, start_max = 200.0;
    double price_floor = 10.0;

    int channels() const { return kind == GameKind::bivariate ? 2 : 1; }
    int series_length() const { return window + steps + 1; }
    int first_decision() const { return window - 1; }
    int last_decision() const { return window + steps - 2; }
};

struct EpisodeData {
    GameKind kind = GameKind::univariate;
    std::uint64_t seed = 0;
    std::vector<double> price;   // length window + steps + 1
    std::vector<double> signal;  // bivariate only, same length

    // Drawn generation parameters, kept for dumps and fixtures.
    std::vector<double> wave_periods, wave_amps, wave_phases;  // short waves
    double long_period = 0, long_amp = 0, long_phase = 0;
    int lead = 0;
    std::vector<int> jump_times;
    std::vector<double> jump_amps;
};

enum class Action : int { cash = 0, buy = 1, hold = 2 };

inline const char* action_name(Action a) {
    switch (a) {
        case Action::cash: return "CASH";
        case Action::buy: return "BUY";
        case Action::hold: return "HOLD";
    }
    return "?";
}

using ActionMask = std::array<bool, 3>;

// {CASH, BUY} when flat, {CASH, HOLD} when holding.
ActionMask valid_actions(bool holding);

struct StepOutcome {
    double reward = 0.0;
    bool next_holding = false;
    ActionMask next_valid{};
    bool done = false;
};

EpisodeData generate_univariate(const GameConfig& config, std::uint64_t seed);
EpisodeData generate_bivariate(const GameConfig& config, std::uint64_t seed);
EpisodeData generate_episode(const GameConfig& config, std::uint64_t seed);

// Applies an action at decision index t (raw series index). Rewards use raw
// prices: 0 for CASH, p[t+1]-p[t]-c for BUY, p[t+1]-p[t] for HOLD. Throws
// std::invalid_argument on an invalid action or out-of-range t.
StepOutcome step(const EpisodeData& episode, int t, bool holding, Action action,
                 const GameConfig& config);

// Mean-normalized observation window ending at t: per channel x/mean - 1,
// shape window x channels. Throws std::invalid_argument when t is out of the
// observable range.
Tensor2 observe(const EpisodeData& episode, int t, const GameConfig& config);

double episode_pnl(const std::vector<double>& rewards);

}  // namespace tslab
