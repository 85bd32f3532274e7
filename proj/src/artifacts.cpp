#include "tslab/artifacts.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "tslab/errors.hpp"

namespace tslab {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path, const char* who) {
    std::ofstream os(path);
    if (!os) throw IoError(std::string(who) + ": cannot open '" + path + "' for writing");
    return os;
}

json episode_to_json(const EpisodeData& ep) {
    json j;
    j["kind"] = game_kind_name(ep.kind);
    j["seed"] = ep.seed;
    j["price"] = ep.price;
    if (ep.kind == GameKind::bivariate) {
        j["signal"] = ep.signal;
        j["lead"] = ep.lead;
        j["jump_times"] = ep.jump_times;
        j["jump_amps"] = ep.jump_amps;
    } else {
        j["wave_periods"] = ep.wave_periods;
        j["wave_amps"] = ep.wave_amps;
        j["wave_phases"] = ep.wave_phases;
        j["long_period"] = ep.long_period;
        j["long_amp"] = ep.long_amp;
        j["long_phase"] = ep.long_phase;
    }
    return j;
}

EpisodeData episode_from_json(const json& j) {
    EpisodeData ep;
    ep.kind = parse_game_kind(j.at("kind").get<std::string>());
    ep.seed = j.at("seed").get<std::uint64_t>();
    ep.price = j.at("price").get<std::vector<double>>();
    if (ep.kind == GameKind::bivariate) {
        ep.signal = j.at("signal").get<std::vector<double>>();
        ep.lead = j.at("lead").get<int>();
        ep.jump_times = j.at("jump_times").get<std::vector<int>>();
        ep.jump_amps = j.at("jump_amps").get<std::vector<double>>();
    } else {
        ep.wave_periods = j.at("wave_periods").get<std::vector<double>>();
        ep.wave_amps = j.at("wave_amps").get<std::vector<double>>();
        ep.wave_phases = j.at("wave_phases").get<std::vector<double>>();
        ep.long_period = j.at("long_period").get<double>();
        ep.long_amp = j.at("long_amp").get<double>();
        ep.long_phase = j.at("long_phase").get<double>();
    }
    return ep;
}

}  // namespace

void write_episode_dump(const std::vector<EpisodeData>& episodes, const std::string& path) {
    auto os = open_out(path, "write_episode_dump");
    for (const auto& ep : episodes) os << episode_to_json(ep).dump() << "\n";
    if (!os) throw IoError("write_episode_dump: write failed for '" + path + "'");
}

std::vector<EpisodeData> read_episode_dump(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("read_episode_dump: cannot open '" + path + "'");
    std::vector<EpisodeData> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(episode_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw IoError("read_episode_dump: bad record in '" + path + "': " + e.what());
        }
    }
    return out;
}

void write_train_log(const std::vector<TrainLogRow>& log, const std::string& path) {
    auto os = open_out(path, "write_train_log");
    for (const auto& row : log) {
        json j{{"episode", row.episode},
               {"pnl", row.pnl},
               {"epsilon", row.epsilon},
               {"mean_loss", row.mean_loss}};
        os << j.dump() << "\n";
    }
    if (!os) throw IoError("write_train_log: write failed for '" + path + "'");
}

void write_eval_report(const EvalReport& report, const std::string& path) {
    auto os = open_out(path, "write_eval_report");
    json j{{"spec", report.spec_name},
           {"param_count", report.param_count},
           {"split", report.split},
           {"mean_pnl", report.mean_pnl},
           {"frac_positive", report.frac_positive},
           {"mean_oracle_ratio", report.mean_oracle_ratio},
           {"episode_pnls", report.episode_pnls}};
    os << j.dump(2) << "\n";
    if (!os) throw IoError("write_eval_report: write failed for '" + path + "'");
}

EvalReport read_eval_report(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("read_eval_report: cannot open '" + path + "'");
    json j;
    try {
        is >> j;
        EvalReport r;
        r.spec_name = j.at("spec").get<std::string>();
        r.param_count = j.at("param_count").get<std::size_t>();
        r.split = j.at("split").get<std::string>();
        r.mean_pnl = j.at("mean_pnl").get<double>();
        r.frac_positive = j.at("frac_positive").get<double>();
        r.mean_oracle_ratio = j.at("mean_oracle_ratio").get<double>();
        r.episode_pnls = j.at("episode_pnls").get<std::vector<double>>();
        return r;
    } catch (const json::exception& e) {
        throw IoError("read_eval_report: bad report '" + path + "': " + e.what());
    }
}

void write_comparison_json(const std::vector<ComparisonRow>& rows, const std::string& path) {
    auto os = open_out(path, "write_comparison_json");
    json arr = json::array();
    for (const auto& r : rows) {
        json j{{"spec", r.spec}, {"param_count", r.params}};
        if (r.have_in) {
            j["in_sample"] = {{"mean_pnl", r.in_mean}, {"frac_positive", r.in_frac}};
        } else {
            j["in_sample"] = nullptr;
        }
        if (r.have_out) {
            j["out_of_sample"] = {{"mean_pnl", r.out_mean}, {"frac_positive", r.out_frac}};
        } else {
            j["out_of_sample"] = nullptr;
        }
        arr.push_back(j);
    }
    os << arr.dump(2) << "\n";
    if (!os) throw IoError("write_comparison_json: write failed for '" + path + "'");
}

}  // namespace tslab
