#include "tslab/dqn.hpp"

#include <algorithm>
#include <unordered_set>

#include "tslab/errors.hpp"

namespace tslab {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("ReplayMemory: capacity must be positive");
    buf_.reserve(capacity);
}

void ReplayMemory::push(Transition t) {
    if (buf_.size() < capacity_) {
        buf_.push_back(std::move(t));
    } else {
        buf_[next_] = std::move(t);  // next_ is the oldest slot once full
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t n, std::mt19937_64& rng) const {
    if (n > buf_.size()) throw ConfigError("ReplayMemory: sample larger than stored size");
    // Floyd's algorithm: n distinct uniform indices with n draws.
    std::unordered_set<std::size_t> seen;
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t j = buf_.size() - n; j < buf_.size(); ++j) {
        std::uniform_int_distribution<std::size_t> d(0, j);
        const std::size_t t = d(rng);
        if (seen.insert(t).second)
            out.push_back(t);
        else {
            seen.insert(j);
            out.push_back(j);
        }
    }
    return out;
}

double epsilon_for_episode(const Hyperparams& hyper, int episode) {
    if (hyper.epsilon_decay_episodes <= 0 || episode >= hyper.epsilon_decay_episodes)
        return hyper.epsilon_end;
    const double frac = static_cast<double>(episode) / hyper.epsilon_decay_episodes;
    return hyper.epsilon_start + (hyper.epsilon_end - hyper.epsilon_start) * frac;
}

Action select_action(Network& net, const Tensor2& state, bool holding, double epsilon,
                     std::mt19937_64& rng, std::array<double, 3>* q_out) {
    const Tensor2& q = net.forward(state);
    if (q_out) *q_out = {q.data[0], q.data[1], q.data[2]};
    const ActionMask mask = valid_actions(holding);
    if (epsilon > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
        std::vector<int> valid;
        for (int a = 0; a < 3; ++a)
            if (mask[a]) valid.push_back(a);
        const int pick = std::uniform_int_distribution<int>(0, static_cast<int>(valid.size()) - 1)(rng);
        return static_cast<Action>(valid[pick]);
    }
    int best = -1;
    for (int a = 0; a < 3; ++a) {
        if (!mask[a]) continue;
        if (best < 0 || q.data[a] > q.data[best]) best = a;
    }
    return static_cast<Action>(best);
}

double q_target(const Transition& tr, Network& net, double gamma) {
    if (tr.done) return tr.reward;
    const Tensor2& q = net.forward(tr.next_state);
    const ActionMask mask = valid_actions(tr.next_holding);
    double best = 0.0;
    bool first = true;
    for (int a = 0; a < 3; ++a) {
        if (!mask[a]) continue;
        if (first || q.data[a] > best) best = q.data[a];
        first = false;
    }
    return tr.reward + gamma * best;
}

std::optional<double> train_step(Network& net, Optimizer& opt, const ReplayMemory& memory,
                                 const Hyperparams& hyper, std::mt19937_64& rng) {
    if (memory.size() < hyper.learn_start) return std::nullopt;
    const std::size_t batch = static_cast<std::size_t>(hyper.batch_size);
    const auto indices = memory.sample_indices(std::min(batch, memory.size()), rng);
    net.zero_grads();
    Tensor2 out_grad(1, 3);
    double loss = 0.0;
    for (const std::size_t idx : indices) {
        const Transition& tr = memory[idx];
        const double target = q_target(tr, net, hyper.gamma);
        const Tensor2& q = net.forward(tr.state);
        const int a = static_cast<int>(tr.action);
        const double diff = q.data[a] - target;
        loss += diff * diff;
        out_grad.zero();
        out_grad.data[a] = 2.0 * diff / static_cast<double>(indices.size());
        net.backward(out_grad);
    }
    auto params = net.params();
    opt.step(params);
    return loss / static_cast<double>(indices.size());
}

EpisodeResult run_episode(Network& net, const EpisodeData& episode, const GameConfig& config,
                          const Hyperparams& hyper, RunMode mode, double epsilon,
                          std::mt19937_64& rng, ReplayMemory* memory, Optimizer* opt) {
    if (mode == RunMode::train && (!memory || !opt))
        throw ConfigError("run_episode: train mode needs a replay memory and an optimizer");
    EpisodeResult result;
    bool holding = false;
    double loss_sum = 0.0;
    int loss_count = 0;
    for (int t = config.first_decision(); t <= config.last_decision(); ++t) {
        const Tensor2 state = observe(episode, t, config);
        std::array<double, 3> q{};
        const double eps = (mode == RunMode::train) ? epsilon : 0.0;
        const Action action = select_action(net, state, holding, eps, rng, &q);
        const StepOutcome outcome = step(episode, t, holding, action, config);
        result.trace.push_back({t, action, outcome.reward, q, holding});
        result.rewards.push_back(outcome.reward);
        if (mode == RunMode::train) {
            Transition tr;
            tr.state = state;
            tr.holding = holding;
            tr.action = action;
            tr.reward = outcome.reward;
            tr.next_state = observe(episode, t + 1, config);
            tr.next_holding = outcome.next_holding;
            tr.done = outcome.done;
            memory->push(std::move(tr));
            try {
                if (auto loss = train_step(net, *opt, *memory, hyper, rng)) {
                    loss_sum += *loss;
                    ++loss_count;
                }
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " (decision step t=" + std::to_string(t) + ")");
            }
        }
        holding = outcome.next_holding;
    }
    result.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    return result;
}

TrainResult train(const NetSpec& spec, const Hyperparams& hyper, const GameConfig& config,
                  const std::vector<std::uint64_t>& episode_seeds, std::uint64_t init_seed,
                  std::uint64_t agent_seed, const std::function<void(const TrainLogRow&)>& on_episode) {
    if (spec.window != config.window || spec.channels != config.channels())
        throw ConfigError("train: spec input " + std::to_string(spec.window) + "x" +
                          std::to_string(spec.channels) + " does not match game (" +
                          std::to_string(config.window) + "x" + std::to_string(config.channels()) + ")");
    TrainResult result;
    result.net = build(spec, init_seed);
    Optimizer opt(hyper.optimizer);
    ReplayMemory memory(hyper.memory_capacity);
    std::mt19937_64 rng(agent_seed);
    for (std::size_t e = 0; e < episode_seeds.size(); ++e) {
        const EpisodeData episode = generate_episode(config, episode_seeds[e]);
        const double eps = epsilon_for_episode(hyper, static_cast<int>(e));
        EpisodeResult er;
        try {
            er = run_episode(result.net, episode, config, hyper, RunMode::train, eps, rng,
                             &memory, &opt);
        } catch (const NumericError& ex) {
            throw NumericError("training diverged in episode " + std::to_string(e) + ": " + ex.what());
        }
        TrainLogRow row{static_cast<int>(e), episode_pnl(er.rewards), eps, er.mean_loss};
        result.log.push_back(row);
        if (on_episode) on_episode(row);
    }
    return result;
}

}  // namespace tslab
