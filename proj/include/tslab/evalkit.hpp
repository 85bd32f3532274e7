#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslab/dqn.hpp"
#include "tslab/games.hpp"

namespace tslab {

// Stateless seed derivation so train/test streams never collide.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

struct Dataset {
    std::string name;
    GameKind kind = GameKind::univariate;
    std::string split;  // train | in_sample | out_of_sample
    std::vector<std::uint64_t> seeds;
};

Dataset make_train_dataset(const GameConfig& config, std::uint64_t base_seed, int episodes);
// First `episodes` training seeds, replayed greedily.
Dataset make_in_sample_dataset(const Dataset& train, int episodes);
// Fresh seeds from a stream disjoint from training.
Dataset make_out_of_sample_dataset(const GameConfig& config, std::uint64_t base_seed, int episodes);

struct OraclePlan {
    double pnl = 0.0;
    std::vector<Action> actions;  // one per decision step
};

// Perfect-foresight optimum: dynamic program over (decision index, holding)
// under the game's reward and validity rules. Exact, O(T).
OraclePlan oracle_pnl(const EpisodeData& episode, const GameConfig& config);

struct EvalReport {
    std::string spec_name;
    std::size_t param_count = 0;
    std::string split;
    double mean_pnl = 0.0;
    double frac_positive = 0.0;     // strict P&L > 0
    double mean_oracle_ratio = 0.0;  // over episodes with oracle > 0
    std::vector<double> episode_pnls;
};

// Greedy play over every episode of the dataset.
EvalReport evaluate(Network& net, const NetSpec& spec, const Dataset& dataset,
                    const GameConfig& config);

struct ComparisonRow {
    std::string spec;
    std::size_t params = 0;
    bool have_in = false, have_out = false;
    double in_mean = 0.0, in_frac = 0.0;
    double out_mean = 0.0, out_frac = 0.0;
};

// Collapses per-split reports into one row per spec. Specs with missing
// splits keep their row, flagged via have_in/have_out.
std::vector<ComparisonRow> comparison_table(const std::vector<std::string>& spec_names,
                                            const std::vector<EvalReport>& reports);

std::string render_comparison(const std::vector<ComparisonRow>& rows, const std::string& title);

// Plot-data export of a greedy episode: one line per decision with
// t, price, action, the Q triple, and the pre-action holding flag.
void trace_export(const std::vector<TraceRow>& trace, const EpisodeData& episode,
                  const std::string& path);

struct ParsedTraceRow {
    int t = 0;
    double price = 0.0;
    std::string action;
    double q_cash = 0.0, q_buy = 0.0, q_hold = 0.0;
    bool holding = false;
};

std::vector<ParsedTraceRow> parse_trace_file(const std::string& path);

}  // namespace tslab
