#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tslab/artifacts.hpp"
#include "tslab/dqn.hpp"
#include "tslab/errors.hpp"
#include "tslab/evalkit.hpp"
#include "tslab/games.hpp"
#include "tslab/qnets.hpp"
#include "tslab/run_config.hpp"
#include "tslab/weights_io.hpp"

namespace fs = std::filesystem;
using namespace tslab;

namespace {

constexpr std::uint64_t kDumpStream = 3;
constexpr std::uint64_t kInitStream = 10;
constexpr std::uint64_t kAgentStream = 11;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> episodes;
    std::vector<std::string> specs;
};

RunConfig resolve_config(const std::string& config_path, const Overrides& ov) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.episodes) cfg.hyper.train_episodes = *ov.episodes;
    if (!ov.specs.empty()) cfg.specs = ov.specs;
    for (const auto& s : cfg.specs) parse_spec(s, cfg.game.channels(), cfg.game.window);
    return cfg;
}

void ensure_dirs(const RunConfig& cfg) {
    for (const char* sub : {"episodes", "weights", "logs", "reports"}) {
        std::error_code ec;
        fs::create_directories(fs::path(cfg.out_dir) / sub, ec);
        if (ec)
            throw IoError("cannot create output directory '" +
                          (fs::path(cfg.out_dir) / sub).string() + "': " + ec.message());
    }
}

std::string weights_path(const RunConfig& cfg, const std::string& spec) {
    return (fs::path(cfg.out_dir) / "weights" / (spec + ".tsqw")).string();
}

int cmd_generate(const RunConfig& cfg, int count) {
    ensure_dirs(cfg);
    std::vector<EpisodeData> episodes;
    episodes.reserve(count);
    for (int i = 0; i < count; ++i)
        episodes.push_back(generate_episode(cfg.game, mix_seed(cfg.seed, kDumpStream, i)));
    const std::string path =
        (fs::path(cfg.out_dir) / "episodes" / (game_kind_name(cfg.game.kind) + "_episodes.jsonl"))
            .string();
    write_episode_dump(episodes, path);
    std::cout << "wrote " << count << " " << game_kind_name(cfg.game.kind) << " episodes to "
              << path << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    if (cfg.specs.empty()) throw ConfigError("train: no architectures in config 'specs'");
    ensure_dirs(cfg);
    const Dataset train_set = make_train_dataset(cfg.game, cfg.seed, cfg.hyper.train_episodes);
    for (const auto& name : cfg.specs) {
        const NetSpec spec = parse_spec(name, cfg.game.channels(), cfg.game.window);
        const std::uint64_t key = fnv1a(spec.format());
        std::cout << "training " << spec.format() << " on " << train_set.seeds.size()
                  << " episodes...\n";
        TrainResult result = tslab::train(spec, cfg.hyper, cfg.game, train_set.seeds,
                                          mix_seed(cfg.seed, kInitStream, key),
                                          mix_seed(cfg.seed, kAgentStream, key));
        save_weights(result.net, spec, weights_path(cfg, spec.format()));
        write_train_log(result.log,
                        (fs::path(cfg.out_dir) / "logs" / (spec.format() + ".train.jsonl")).string());
        double last_pnl = result.log.empty() ? 0.0 : result.log.back().pnl;
        std::cout << "  done; final episode P&L " << last_pnl << ", weights at "
                  << weights_path(cfg, spec.format()) << "\n";
    }
    return 0;
}

int cmd_eval(const RunConfig& cfg, bool with_trace) {
    if (cfg.specs.empty()) throw ConfigError("eval: no architectures in config 'specs'");
    ensure_dirs(cfg);
    const Dataset train_set = make_train_dataset(cfg.game, cfg.seed, cfg.hyper.train_episodes);
    const Dataset in_sample = make_in_sample_dataset(train_set, cfg.hyper.test_episodes);
    const Dataset out_sample =
        make_out_of_sample_dataset(cfg.game, cfg.seed, cfg.hyper.test_episodes);
    std::vector<EvalReport> reports;
    for (const auto& name : cfg.specs) {
        const NetSpec spec = parse_spec(name, cfg.game.channels(), cfg.game.window);
        const std::string wpath = weights_path(cfg, spec.format());
        if (!fs::exists(wpath)) {
            std::cerr << "warning: missing weight file " << wpath << "; row will be flagged\n";
            continue;
        }
        Network net = load_weights(wpath, spec);
        for (const Dataset* ds : {&in_sample, &out_sample}) {
            EvalReport report = evaluate(net, spec, *ds, cfg.game);
            write_eval_report(report, (fs::path(cfg.out_dir) / "reports" /
                                       ("report_" + spec.format() + "_" + ds->split + ".json"))
                                          .string());
            reports.push_back(std::move(report));
        }
        if (with_trace) {
            const EpisodeData episode = generate_episode(cfg.game, out_sample.seeds.at(0));
            Hyperparams hyper;
            std::mt19937_64 rng(0);
            const EpisodeResult er =
                run_episode(net, episode, cfg.game, hyper, RunMode::greedy, 0.0, rng);
            trace_export(er.trace, episode,
                         (fs::path(cfg.out_dir) / "reports" / ("trace_" + spec.format() + ".csv"))
                             .string());
        }
    }
    const auto rows = comparison_table(cfg.specs, reports);
    write_comparison_json(rows,
                          (fs::path(cfg.out_dir) / "reports" / "comparison_table.json").string());
    const std::string rendered =
        render_comparison(rows, game_kind_name(cfg.game.kind) + " game, " +
                                    std::to_string(cfg.hyper.test_episodes) + " episodes per split");
    std::ofstream txt((fs::path(cfg.out_dir) / "reports" / "comparison_table.txt").string());
    txt << rendered;
    std::cout << rendered;
    return 0;
}

int cmd_params(bool as_json) {
    const auto rows = param_table();
    const auto& expected = reference_param_counts();
    std::vector<std::string> mismatches;
    if (as_json) {
        std::cout << "[";
        for (std::size_t i = 0; i < rows.size(); ++i)
            std::cout << (i ? ",\n " : "\n ") << "{\"spec\":\"" << rows[i].spec
                      << "\",\"univariate\":" << rows[i].univariate_params
                      << ",\"bivariate\":" << rows[i].bivariate_params << "}";
        std::cout << "\n]\n";
    } else {
        std::printf("%-10s %12s %12s\n", "spec", "univariate", "bivariate");
        for (const auto& r : rows)
            std::printf("%-10s %12zu %12zu\n", r.spec.c_str(), r.univariate_params,
                        r.bivariate_params);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].univariate_params != expected[i][0])
            mismatches.push_back(rows[i].spec + " univariate: got " +
                                 std::to_string(rows[i].univariate_params) + ", expected " +
                                 std::to_string(expected[i][0]));
        if (rows[i].bivariate_params != expected[i][1])
            mismatches.push_back(rows[i].spec + " bivariate: got " +
                                 std::to_string(rows[i].bivariate_params) + ", expected " +
                                 std::to_string(expected[i][1]));
    }
    if (!mismatches.empty()) {
        std::string msg = "parameter-count mismatches:";
        for (const auto& m : mismatches) msg += "\n  " + m;
        throw VerifyError(msg);
    }
    std::cout << rows.size() * 2 << "/" << rows.size() * 2 << " match\n";
    return 0;
}

int cmd_trace(const RunConfig& cfg, const std::string& spec_name, int episode_index) {
    ensure_dirs(cfg);
    const NetSpec spec = parse_spec(spec_name, cfg.game.channels(), cfg.game.window);
    Network net = load_weights(weights_path(cfg, spec.format()), spec);
    const Dataset out_sample =
        make_out_of_sample_dataset(cfg.game, cfg.seed, cfg.hyper.test_episodes);
    if (episode_index < 0 || episode_index >= static_cast<int>(out_sample.seeds.size()))
        throw ConfigError("trace: episode index out of range");
    const EpisodeData episode = generate_episode(cfg.game, out_sample.seeds[episode_index]);
    Hyperparams hyper;
    std::mt19937_64 rng(0);
    const EpisodeResult er = run_episode(net, episode, cfg.game, hyper, RunMode::greedy, 0.0, rng);
    const std::string path =
        (fs::path(cfg.out_dir) / "reports" /
         ("trace_" + spec.format() + "_" + std::to_string(episode_index) + ".csv"))
            .string();
    trace_export(er.trace, episode, path);
    std::cout << "episode P&L " << episode_pnl(er.rewards) << ", trace at " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep Q-learning laboratory for idealized trading games"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    int count = 5;
    bool with_trace = false;
    bool as_json = false;
    std::string trace_spec;
    int trace_episode = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration file (JSON)");
        sub->add_option("--seed", [&](const std::vector<std::string>& v) {
            ov.seed = std::stoull(v.at(0));
            return true;
        }, "Override the config seed");
        sub->add_option("--out", [&](const std::vector<std::string>& v) {
            ov.out_dir = v.at(0);
            return true;
        }, "Override the output directory");
    };

    auto* gen = app.add_subcommand("generate", "Generate and dump game episodes");
    add_common(gen);
    gen->add_option("--count", count, "Number of episodes to dump");

    auto* train = app.add_subcommand("train", "Train one agent per configured architecture");
    add_common(train);
    train->add_option("--specs", ov.specs, "Override the architecture list");
    train->add_option("--episodes", [&](const std::vector<std::string>& v) {
        ov.episodes = std::stoi(v.at(0));
        return true;
    }, "Override the training episode count");

    auto* eval = app.add_subcommand("eval", "Evaluate trained agents and emit the comparison table");
    add_common(eval);
    eval->add_flag("--trace", with_trace, "Also export a greedy-episode trace per agent");

    auto* params = app.add_subcommand("params", "Print and verify the 32-entry parameter-count table");
    params->add_flag("--json", as_json, "Emit JSON instead of the aligned table");

    auto* trace = app.add_subcommand("trace", "Export a greedy-episode trace for one agent");
    add_common(trace);
    trace->add_option("--spec", trace_spec, "Architecture name")->required();
    trace->add_option("--episode", trace_episode, "Out-of-sample episode index");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_generate(resolve_config(config_path, ov), count);
        if (train->parsed()) return cmd_train(resolve_config(config_path, ov));
        if (eval->parsed()) return cmd_eval(resolve_config(config_path, ov), with_trace);
        if (params->parsed()) return cmd_params(as_json);
        if (trace->parsed())
            return cmd_trace(resolve_config(config_path, ov), trace_spec, trace_episode);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const VerifyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
