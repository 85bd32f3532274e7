#include "tslab/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tslab/errors.hpp"

namespace tslab {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    // splitmix64 finalizer over the combined key
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;
}  // namespace

Dataset make_train_dataset(const GameConfig& config, std::uint64_t base_seed, int episodes) {
    Dataset d;
    d.name = game_kind_name(config.kind) + "-train";
    d.kind = config.kind;
    d.split = "train";
    for (int i = 0; i < episodes; ++i) d.seeds.push_back(mix_seed(base_seed, kTrainStream, i));
    return d;
}

Dataset make_in_sample_dataset(const Dataset& train, int episodes) {
    Dataset d;
    d.name = train.name + "-in_sample";
    d.kind = train.kind;
    d.split = "in_sample";
    const int n = std::min<int>(episodes, static_cast<int>(train.seeds.size()));
    d.seeds.assign(train.seeds.begin(), train.seeds.begin() + n);
    return d;
}

Dataset make_out_of_sample_dataset(const GameConfig& config, std::uint64_t base_seed, int episodes) {
    Dataset d;
    d.name = game_kind_name(config.kind) + "-out_of_sample";
    d.kind = config.kind;
    d.split = "out_of_sample";
    for (int i = 0; i < episodes; ++i) d.seeds.push_back(mix_seed(base_seed, kTestStream, i));
    return d;
}

OraclePlan oracle_pnl(const EpisodeData& episode, const GameConfig& config) {
    const int decisions = config.steps;
    const int first = config.first_decision();
    // value[d][h]: best total reward from decision d onward with holding h
    std::vector<std::array<double, 2>> value(decisions + 1, {0.0, 0.0});
    for (int d = decisions - 1; d >= 0; --d) {
        const int t = first + d;
        const double dp = episode.price[t + 1] - episode.price[t];
        value[d][0] = std::max(value[d + 1][0], dp - config.cost + value[d + 1][1]);
        value[d][1] = std::max(value[d + 1][0], dp + value[d + 1][1]);
    }
    OraclePlan plan;
    plan.pnl = value[0][0];
    plan.actions.reserve(decisions);
    int h = 0;
    for (int d = 0; d < decisions; ++d) {
        const int t = first + d;
        const double dp = episode.price[t + 1] - episode.price[t];
        const double cash_value = value[d + 1][0];
        const double keep_value = (h == 0 ? dp - config.cost : dp) + value[d + 1][1];
        if (cash_value >= keep_value) {  // ties go to the lowest action index
            plan.actions.push_back(Action::cash);
            h = 0;
        } else {
            plan.actions.push_back(h == 0 ? Action::buy : Action::hold);
            h = 1;
        }
    }
    return plan;
}

EvalReport evaluate(Network& net, const NetSpec& spec, const Dataset& dataset,
                    const GameConfig& config) {
    EvalReport report;
    report.spec_name = spec.format();
    report.param_count = net.count_params();
    report.split = dataset.split;
    Hyperparams hyper;  // greedy play ignores the training knobs
    std::mt19937_64 rng(0);
    double sum = 0.0;
    int positive = 0;
    double ratio_sum = 0.0;
    int ratio_count = 0;
    for (const std::uint64_t seed : dataset.seeds) {
        const EpisodeData episode = generate_episode(config, seed);
        const EpisodeResult er =
            run_episode(net, episode, config, hyper, RunMode::greedy, 0.0, rng);
        const double pnl = episode_pnl(er.rewards);
        report.episode_pnls.push_back(pnl);
        sum += pnl;
        if (pnl > 0.0) ++positive;
        const double best = oracle_pnl(episode, config).pnl;
        if (best > 0.0) {
            ratio_sum += pnl / best;
            ++ratio_count;
        }
    }
    const int n = static_cast<int>(dataset.seeds.size());
    report.mean_pnl = n > 0 ? sum / n : 0.0;
    report.frac_positive = n > 0 ? static_cast<double>(positive) / n : 0.0;
    report.mean_oracle_ratio = ratio_count > 0 ? ratio_sum / ratio_count : 0.0;
    return report;
}

std::vector<ComparisonRow> comparison_table(const std::vector<std::string>& spec_names,
                                            const std::vector<EvalReport>& reports) {
    std::vector<ComparisonRow> rows;
    for (const auto& name : spec_names) {
        ComparisonRow row;
        row.spec = name;
        for (const auto& r : reports) {
            if (r.spec_name != name) continue;
            row.params = r.param_count;
            if (r.split == "in_sample") {
                row.have_in = true;
                row.in_mean = r.mean_pnl;
                row.in_frac = r.frac_positive;
            } else if (r.split == "out_of_sample") {
                row.have_out = true;
                row.out_mean = r.mean_pnl;
                row.out_frac = r.frac_positive;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::string render_comparison(const std::vector<ComparisonRow>& rows, const std::string& title) {
    std::ostringstream os;
    os << title << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %8s %14s %8s %14s %8s\n", "spec", "#param",
                  "in mean P&L", "P&L>0", "out mean P&L", "P&L>0");
    os << line;
    for (const auto& r : rows) {
        std::string in_mean = r.have_in ? [&] {
            char b[32];
            std::snprintf(b, sizeof(b), "%.1f", r.in_mean);
            return std::string(b);
        }() : std::string("MISSING");
        std::string in_frac = r.have_in ? [&] {
            char b[32];
            std::snprintf(b, sizeof(b), "%.0f%%", 100.0 * r.in_frac);
            return std::string(b);
        }() : std::string("-");
        std::string out_mean = r.have_out ? [&] {
            char b[32];
            std::snprintf(b, sizeof(b), "%.1f", r.out_mean);
            return std::string(b);
        }() : std::string("MISSING");
        std::string out_frac = r.have_out ? [&] {
            char b[32];
            std::snprintf(b, sizeof(b), "%.0f%%", 100.0 * r.out_frac);
            return std::string(b);
        }() : std::string("-");
        std::snprintf(line, sizeof(line), "%-10s %8zu %14s %8s %14s %8s\n", r.spec.c_str(),
                      r.params, in_mean.c_str(), in_frac.c_str(), out_mean.c_str(),
                      out_frac.c_str());
        os << line;
    }
    return os.str();
}

void trace_export(const std::vector<TraceRow>& trace, const EpisodeData& episode,
                  const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("trace_export: cannot open '" + path + "' for writing");
    os << "t,price,action,q_cash,q_buy,q_hold,holding\n";
    os.precision(17);
    for (const auto& row : trace) {
        os << row.t << "," << episode.price[row.t] << "," << action_name(row.action) << ","
           << row.q[0] << "," << row.q[1] << "," << row.q[2] << "," << (row.holding ? 1 : 0)
           << "\n";
    }
    if (!os) throw IoError("trace_export: write failed for '" + path + "'");
}

std::vector<ParsedTraceRow> parse_trace_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("parse_trace_file: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line) || line != "t,price,action,q_cash,q_buy,q_hold,holding")
        throw IoError("parse_trace_file: '" + path + "' has an unexpected header");
    std::vector<ParsedTraceRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        ParsedTraceRow row;
        auto next = [&](const char* what) {
            if (!std::getline(ls, field, ','))
                throw IoError(std::string("parse_trace_file: missing field ") + what);
            return field;
        };
        row.t = std::stoi(next("t"));
        row.price = std::stod(next("price"));
        row.action = next("action");
        row.q_cash = std::stod(next("q_cash"));
        row.q_buy = std::stod(next("q_buy"));
        row.q_hold = std::stod(next("q_hold"));
        row.holding = std::stoi(next("holding")) != 0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tslab
