#include <doctest.h>

#include <cmath>
#include <random>

#include "tslab/dqn.hpp"
#include "tslab/errors.hpp"
#include "tslab/qnets.hpp"

using namespace tslab;

namespace {

// Network that outputs a fixed Q triple regardless of input.
Network fixed_q_net(double q_cash, double q_buy, double q_hold) {
    Network net;
    auto dense = std::make_unique<DenseLayer>(1, 3, Activation::linear);
    dense->bias(0, 0) = q_cash;
    dense->bias(0, 1) = q_buy;
    dense->bias(0, 2) = q_hold;
    net.add(std::move(dense));
    return net;
}

Tensor2 unit_state() { return Tensor2(1, 1, {1.0}); }

std::vector<double> snapshot(Network& net) {
    std::vector<double> all;
    for (auto& p : net.params()) all.insert(all.end(), p.value->data.begin(), p.value->data.end());
    return all;
}

}  // namespace

TEST_CASE("select_action: greedy respects the validity mask") {
    std::mt19937_64 rng(1);
    {
        Network net = fixed_q_net(1.0, 2.0, 9.9);
        CHECK(select_action(net, unit_state(), false, 0.0, rng) == Action::buy);
    }
    {
        Network net = fixed_q_net(5.0, 99.0, 4.0);
        CHECK(select_action(net, unit_state(), true, 0.0, rng) == Action::cash);
    }
    {
        // ties break to the lowest action index
        Network net = fixed_q_net(3.0, 3.0, 3.0);
        CHECK(select_action(net, unit_state(), false, 0.0, rng) == Action::cash);
    }
}

TEST_CASE("select_action: epsilon=1 is uniform over the two valid actions") {
    Network net = fixed_q_net(0.0, 10.0, 0.0);
    std::mt19937_64 rng(42);
    for (bool holding : {false, true}) {
        int counts[3] = {0, 0, 0};
        const int n = 10000;
        for (int i = 0; i < n; ++i)
            ++counts[static_cast<int>(select_action(net, unit_state(), holding, 1.0, rng))];
        const ActionMask mask = valid_actions(holding);
        double chi2 = 0.0;
        for (int a = 0; a < 3; ++a) {
            if (!mask[a]) {
                CHECK(counts[a] == 0);
                continue;
            }
            const double expected = n / 2.0;
            chi2 += (counts[a] - expected) * (counts[a] - expected) / expected;
        }
        CHECK(chi2 < 6.63);  // chi-square 1% critical value, 1 dof
    }
}

TEST_CASE("q_target") {
    Network net = fixed_q_net(2.0, 50.0, 3.0);
    Transition tr;
    tr.reward = 4.2;
    tr.done = true;
    tr.next_state = unit_state();
    tr.next_holding = true;
    CHECK(q_target(tr, net, 0.8) == doctest::Approx(4.2));

    tr.done = false;
    tr.reward = 1.0;
    // BUY (50.0) is masked while holding; max valid is HOLD at 3.0
    CHECK(q_target(tr, net, 0.8) == doctest::Approx(1.0 + 0.8 * 3.0));
    CHECK(q_target(tr, net, 0.0) == doctest::Approx(1.0));

    // terminal targets ignore the next state entirely
    tr.done = true;
    tr.reward = -2.5;
    const double t1 = q_target(tr, net, 0.8);
    tr.next_state.data[0] = 1e9;
    tr.next_holding = false;
    CHECK(q_target(tr, net, 0.8) == t1);
}

TEST_CASE("replay memory: capacity bound and FIFO eviction") {
    ReplayMemory mem(5);
    for (int i = 0; i < 8; ++i) {
        Transition tr;
        tr.reward = i;
        tr.state = unit_state();
        tr.next_state = unit_state();
        mem.push(std::move(tr));
        CHECK(mem.size() <= 5);
    }
    CHECK(mem.size() == 5);
    std::vector<double> rewards;
    for (std::size_t i = 0; i < mem.size(); ++i) rewards.push_back(mem[i].reward);
    std::sort(rewards.begin(), rewards.end());
    CHECK(rewards == std::vector<double>{3, 4, 5, 6, 7});
}

TEST_CASE("replay memory: sampling is without replacement") {
    ReplayMemory mem(100);
    for (int i = 0; i < 100; ++i) {
        Transition tr;
        tr.state = unit_state();
        mem.push(std::move(tr));
    }
    std::mt19937_64 rng(3);
    for (int round = 0; round < 50; ++round) {
        auto idx = mem.sample_indices(64, rng);
        std::sort(idx.begin(), idx.end());
        CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
        CHECK(idx.back() < 100);
    }
}

TEST_CASE("train_step: no-op below the learn-start threshold") {
    Network net = build(parse_spec("MLP-16x4", 1), 1);
    const auto before = snapshot(net);
    Optimizer opt({});
    ReplayMemory mem(100);
    Hyperparams hyper;
    hyper.learn_start = 50;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        Transition tr;
        tr.state = Tensor2(40, 1);
        tr.next_state = Tensor2(40, 1);
        mem.push(std::move(tr));
    }
    CHECK_FALSE(train_step(net, opt, mem, hyper, rng).has_value());
    CHECK(snapshot(net) == before);
}

TEST_CASE("train_step: zero loss is a fixed point under SGD") {
    Network net = build(parse_spec("MLP-16x4", 1), 2);
    Tensor2 state(40, 1);
    std::mt19937_64 init(5);
    for (double& v : state.data) v = std::uniform_real_distribution<double>(-0.2, 0.2)(init);
    const double q_cash = net.forward(state).data[0];

    Transition tr;
    tr.state = state;
    tr.action = Action::cash;
    tr.reward = q_cash;  // target equals the current prediction
    tr.done = true;
    tr.next_state = state;
    ReplayMemory mem(10);
    mem.push(std::move(tr));

    Hyperparams hyper;
    hyper.learn_start = 1;
    hyper.batch_size = 1;
    hyper.optimizer.algo = OptAlgo::sgd;
    hyper.optimizer.learning_rate = 0.05;
    Optimizer opt(hyper.optimizer);
    std::mt19937_64 rng(1);
    const auto before = snapshot(net);
    const auto loss = train_step(net, opt, mem, hyper, rng);
    REQUIRE(loss.has_value());
    CHECK(*loss == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(snapshot(net) == before);
}

TEST_CASE("train_step: single transition converges to the fixed target") {
    Network net = build(parse_spec("MLP-16x4", 1), 3);
    Tensor2 state(40, 1);
    std::mt19937_64 init(6);
    for (double& v : state.data) v = std::uniform_real_distribution<double>(-0.2, 0.2)(init);

    Transition tr;
    tr.state = state;
    tr.action = Action::buy;
    tr.reward = 4.2;
    tr.done = true;
    tr.next_state = state;
    ReplayMemory mem(10);
    mem.push(std::move(tr));

    Hyperparams hyper;
    hyper.learn_start = 1;
    hyper.batch_size = 1;
    hyper.optimizer.algo = OptAlgo::sgd;
    hyper.optimizer.learning_rate = 0.02;
    Optimizer opt(hyper.optimizer);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 2000; ++i) train_step(net, opt, mem, hyper, rng);
    CHECK(std::abs(net.forward(state).data[1] - 4.2) < 1e-3);
}

TEST_CASE("train_step: gradient flows only through the taken action's output") {
    Network net = build(parse_spec("MLP-16x4", 1), 4);
    Tensor2 state(40, 1);
    std::mt19937_64 init(7);
    for (double& v : state.data) v = std::uniform_real_distribution<double>(-0.2, 0.2)(init);

    net.zero_grads();
    net.forward(state);
    Tensor2 out_grad(1, 3);
    out_grad.data[static_cast<int>(Action::buy)] = 1.7;  // taken action only
    net.backward(out_grad);

    auto& head = dynamic_cast<DenseLayer&>(net.layer(net.layer_count() - 1));
    for (int i = 0; i < head.grad_weight.rows; ++i) {
        CHECK(head.grad_weight(i, 0) == 0.0);
        CHECK(head.grad_weight(i, 2) == 0.0);
    }
    CHECK(head.grad_bias(0, 0) == 0.0);
    CHECK(head.grad_bias(0, 2) == 0.0);
    // and the taken column did receive gradient
    double sum = 0.0;
    for (int i = 0; i < head.grad_weight.rows; ++i) sum += std::abs(head.grad_weight(i, 1));
    CHECK(sum > 0.0);
}

TEST_CASE("run_episode: greedy mode is pure, train mode stores 180 transitions") {
    GameConfig cfg;
    const EpisodeData episode = generate_univariate(cfg, 11);
    Network net = build(parse_spec("MLP-16x4", 1), 8);
    Hyperparams hyper;
    std::mt19937_64 rng(2);

    const auto before = snapshot(net);
    const EpisodeResult greedy = run_episode(net, episode, cfg, hyper, RunMode::greedy, 0.0, rng);
    CHECK(snapshot(net) == before);
    CHECK(greedy.rewards.size() == 180);
    CHECK(greedy.trace.size() == 180);
    CHECK(episode_pnl(greedy.rewards) ==
          doctest::Approx([&] {
              double s = 0;
              for (const auto& row : greedy.trace) s += row.reward;
              return s;
          }()).epsilon(1e-12));

    ReplayMemory mem(1000);
    Optimizer opt(hyper.optimizer);
    run_episode(net, episode, cfg, hyper, RunMode::train, 0.5, rng, &mem, &opt);
    CHECK(mem.size() == 180);
}

TEST_CASE("run_episode: every logged action is valid for its position") {
    GameConfig cfg;
    Network net = build(parse_spec("MLP-16x4", 1), 9);
    Hyperparams hyper;
    hyper.learn_start = 100000;  // sampling only, no updates
    ReplayMemory mem(hyper.memory_capacity);
    Optimizer opt(hyper.optimizer);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        const EpisodeData episode = generate_univariate(cfg, 500 + i);
        const EpisodeResult er =
            run_episode(net, episode, cfg, hyper, RunMode::train, 0.7, rng, &mem, &opt);
        for (const auto& row : er.trace)
            CHECK(valid_actions(row.holding)[static_cast<int>(row.action)]);
    }
}

TEST_CASE("epsilon schedule: linear then floor") {
    Hyperparams h;
    CHECK(epsilon_for_episode(h, 0) == doctest::Approx(1.0));
    CHECK(epsilon_for_episode(h, 250) == doctest::Approx(0.55));
    CHECK(epsilon_for_episode(h, 500) == doctest::Approx(0.1));
    CHECK(epsilon_for_episode(h, 999) == doctest::Approx(0.1));
}

TEST_CASE("train: deterministic and no-op without episodes") {
    GameConfig cfg;
    Hyperparams hyper;
    hyper.learn_start = 300;
    hyper.batch_size = 16;
    const NetSpec spec = parse_spec("MLP-16x4", 1);

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < 4; ++i) seeds.push_back(900 + i);

    TrainResult a = train(spec, hyper, cfg, seeds, 1, 2);
    TrainResult b = train(spec, hyper, cfg, seeds, 1, 2);
    CHECK(snapshot(a.net) == snapshot(b.net));
    REQUIRE(a.log.size() == 4);
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].pnl == b.log[i].pnl);
        CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
    }

    TrainResult empty = train(spec, hyper, cfg, {}, 1, 2);
    Network fresh = build(spec, 1);
    CHECK(snapshot(empty.net) == snapshot(fresh));
}
