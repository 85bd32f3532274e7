#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "tslab/games.hpp"
#include "tslab/network.hpp"
#include "tslab/optimizer.hpp"
#include "tslab/qnets.hpp"

namespace tslab {

struct Transition {
    Tensor2 state;
    bool holding = false;
    Action action = Action::cash;
    double reward = 0.0;
    Tensor2 next_state;
    bool next_holding = false;
    bool done = false;
};

// Bounded FIFO transition store with uniform sampling.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return buf_[i]; }

    // Uniform sample of n distinct indices (without replacement).
    std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> buf_;
    std::size_t next_ = 0;
};

struct Hyperparams {
    double gamma = 0.8;
    int train_episodes = 1000;
    int test_episodes = 100;
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    int epsilon_decay_episodes = 500;
    int batch_size = 64;
    std::size_t memory_capacity = 10000;
    std::size_t learn_start = 500;
    OptimizerConfig optimizer;
};

// Linear schedule from epsilon_start to epsilon_end over the first
// epsilon_decay_episodes episodes (0-based index).
double epsilon_for_episode(const Hyperparams& hyper, int episode);

// Epsilon-greedy over the valid actions only; greedy ties go to the lowest
// action index. Also returns the Q triple for tracing.
Action select_action(Network& net, const Tensor2& state, bool holding, double epsilon,
                     std::mt19937_64& rng, std::array<double, 3>* q_out = nullptr);

// r when done, else r + gamma * max over valid next actions of Q(s', a),
// evaluated with the live network.
double q_target(const Transition& tr, Network& net, double gamma);

// One uniform minibatch update: squared error on the taken action's Q output
// only, one optimizer step. No-op (nullopt) below the learn-start threshold.
std::optional<double> train_step(Network& net, Optimizer& opt, const ReplayMemory& memory,
                                 const Hyperparams& hyper, std::mt19937_64& rng);

enum class RunMode { train, greedy };

struct TraceRow {
    int t = 0;
    Action action = Action::cash;
    double reward = 0.0;
    std::array<double, 3> q{};
    bool holding = false;  // position before acting
};

struct EpisodeResult {
    std::vector<double> rewards;
    std::vector<TraceRow> trace;
    double mean_loss = 0.0;  // train mode only, over steps that updated
};

// Plays one full episode. Train mode stores every transition and runs one
// train_step per decision; greedy mode uses epsilon 0 and touches nothing.
EpisodeResult run_episode(Network& net, const EpisodeData& episode, const GameConfig& config,
                          const Hyperparams& hyper, RunMode mode, double epsilon,
                          std::mt19937_64& rng, ReplayMemory* memory = nullptr,
                          Optimizer* opt = nullptr);

struct TrainLogRow {
    int episode = 0;
    double pnl = 0.0;
    double epsilon = 0.0;
    double mean_loss = 0.0;
};

struct TrainResult {
    Network net;
    std::vector<TrainLogRow> log;
};

// Full training run: fresh network from init_seed, one episode per seed in
// order, deterministic given (spec, hyper, config, seeds). Throws
// NumericError naming the episode and step on divergence.
TrainResult train(const NetSpec& spec, const Hyperparams& hyper, const GameConfig& config,
                  const std::vector<std::uint64_t>& episode_seeds, std::uint64_t init_seed,
                  std::uint64_t agent_seed,
                  const std::function<void(const TrainLogRow&)>& on_episode = {});

}  // namespace tslab
