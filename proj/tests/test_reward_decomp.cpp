#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "decoupled_chain.hpp"
#include "graph.hpp"
#include "reward_decomp.hpp"
#include "rng.hpp"
#include "trainer.hpp"

using namespace lomaq;

namespace {

RewardDecomposer make_decomposer(const AgentGraph &g, int obs_dim, int actions, RdConfig cfg,
                                 uint64_t seed = 0) {
    std::vector<int> obs_dims(static_cast<size_t>(g.num_agents()), obs_dim);
    std::vector<int> action_counts(static_cast<size_t>(g.num_agents()), actions);
    return RewardDecomposer(g, obs_dims, action_counts, cfg, seed);
}

Obs zero_obs(int n, int dim) { return Obs(static_cast<size_t>(n), std::vector<double>(dim, 0.0)); }

} // namespace

TEST_CASE("subset family: neighborhood power sets, deduplicated, singletons always in") {
    const auto line3 = AgentGraph::line(3);
    const auto fam1 = build_subset_family(line3, 1);
    CHECK(fam1 == std::vector<std::vector<int>>{{0}, {1}, {2}});
    const auto fam2 = build_subset_family(line3, 2);
    CHECK(fam2 == std::vector<std::vector<int>>{{0}, {0, 1}, {0, 2}, {1}, {1, 2}, {2}});

    AgentGraph edgeless(3);
    for (int card = 1; card <= 3; ++card)
        CHECK(build_subset_family(edgeless, card) == std::vector<std::vector<int>>{{0}, {1}, {2}});
    CHECK_THROWS_AS(build_subset_family(line3, 0), std::invalid_argument);
}

TEST_CASE("zero-initialized heads predict exactly zero") {
    RdConfig cfg;
    cfg.max_card = 2;
    auto dec = make_decomposer(AgentGraph::line(2), 3, 2, cfg);
    const auto obs = zero_obs(2, 3);
    CHECK(dec.predict_global(obs, {0, 1}) == 0.0);
    for (size_t s = 0; s < dec.subsets().size(); ++s)
        CHECK(dec.subset_value(s, obs, {0, 1}) == 0.0);
}

TEST_CASE("single agent: prediction equals the lone subset net") {
    RdConfig cfg;
    auto dec = make_decomposer(AgentGraph(1), 2, 2, cfg);
    REQUIRE(dec.subsets() == std::vector<std::vector<int>>{{0}});
    Obs obs{{0.3, -0.2}};
    auto &net = dec.net(0);
    net.layer(net.num_layers() - 1).bias[0] = 0.77;
    CHECK(dec.predict_global(obs, {1}) == dec.subset_value(0, obs, {1}));
    CHECK(dec.predict_global(obs, {1}) == doctest::Approx(0.77));
}

TEST_CASE("inference splits each subset 1/|I| and conserves the total") {
    RdConfig cfg;
    cfg.max_card = 2;
    cfg.delta = 0.5;
    auto dec = make_decomposer(AgentGraph::line(2), 2, 2, cfg, 3);
    // force r_{01} = 1, singletons 0: zero heads then bias the pair net
    for (size_t s = 0; s < dec.subsets().size(); ++s)
        if (dec.subsets()[s].size() == 2)
            dec.net(dec.net_index_of_subset(s)).layer(3).bias[0] = 1.0;
    const auto obs = zero_obs(2, 2);
    const auto local = dec.infer_local(obs, {0, 0}, 1.0);
    REQUIRE(local.has_value());
    CHECK((*local)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((*local)[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("untrained nets fail the tolerance gate") {
    RdConfig cfg;
    cfg.delta = 0.15;
    auto dec = make_decomposer(AgentGraph::line(2), 2, 2, cfg);
    CHECK_FALSE(dec.infer_local(zero_obs(2, 2), {0, 0}, 1.0).has_value());
    CHECK_FALSE(dec.trained_enough());
}

TEST_CASE("conservation property on random nets and inputs") {
    RdConfig cfg;
    cfg.max_card = 3;
    cfg.delta = 1e9; // gate open; we only test the accounting
    auto dec = make_decomposer(AgentGraph::line(4), 3, 2, cfg, 7);
    auto rng = make_rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // randomize heads so subset values are nonzero
    for (size_t k = 0; k < dec.num_nets(); ++k) {
        auto &last = dec.net(k).layer(dec.net(k).num_layers() - 1);
        for (double &w : last.weight.data)
            w = gauss(rng);
        last.bias[0] = gauss(rng);
    }
    for (int trial = 0; trial < 200; ++trial) {
        Obs obs(4, std::vector<double>(3));
        std::vector<int> action(4);
        for (int i = 0; i < 4; ++i) {
            for (double &v : obs[i])
                v = gauss(rng);
            action[i] = static_cast<int>(rng() % 2);
        }
        double total = 0.0;
        for (size_t s = 0; s < dec.subsets().size(); ++s)
            total += dec.subset_value(s, obs, action);
        const auto local = dec.infer_local(obs, action, total);
        REQUIRE(local.has_value());
        double sum = 0.0;
        for (double r : *local)
            sum += r;
        CHECK(std::fabs(sum - total) <= 1e-12);
    }
}

TEST_CASE("max_card=1 on an edgeless graph reads only per-agent inputs (additive form)") {
    RdConfig cfg;
    cfg.max_card = 1;
    cfg.delta = 1e9;
    auto dec = make_decomposer(AgentGraph(3), 2, 2, cfg, 9);
    auto rng = make_rng(10);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (size_t k = 0; k < dec.num_nets(); ++k) {
        auto &last = dec.net(k).layer(dec.net(k).num_layers() - 1);
        for (double &w : last.weight.data)
            w = gauss(rng);
    }
    Obs obs(3, std::vector<double>(2));
    for (auto &o : obs)
        for (double &v : o)
            v = gauss(rng);
    const auto base = dec.infer_local(obs, {0, 0, 0}, 0.0);
    REQUIRE(base.has_value());
    // changing agent 2's observation must not move agents 0 and 1
    obs[2][0] += 1.5;
    const auto moved = dec.infer_local(obs, {0, 0, 0}, 0.0);
    REQUIRE(moved.has_value());
    CHECK((*moved)[0] == (*base)[0]);
    CHECK((*moved)[1] == (*base)[1]);
    CHECK((*moved)[2] != (*base)[2]);
}

TEST_CASE("scalar regression: prediction converges to the repeated global reward") {
    RdConfig cfg;
    cfg.lambda = 0.0;
    cfg.lr = 0.05;
    cfg.window = 10;
    cfg.delta = 0.05;
    auto dec = make_decomposer(AgentGraph(1), 1, 1, cfg, 11);
    Obs obs{{0.0}};
    std::vector<int> action{0};
    RewardDecomposer::Sample sample{&obs, &action, 1.7};
    for (int iter = 0; iter < 400; ++iter)
        dec.train_step({sample, sample});
    CHECK(dec.predict_global(obs, action) == doctest::Approx(1.7).epsilon(1e-3));
    CHECK(dec.trained_enough());
    const auto local = dec.infer_local(obs, action, 1.7);
    REQUIRE(local.has_value());
    CHECK((*local)[0] == doctest::Approx(1.7).epsilon(1e-2));
}

TEST_CASE("zero global reward with L1 pressure keeps subset outputs at zero") {
    RdConfig cfg;
    cfg.max_card = 2;
    cfg.lambda = 1e-3;
    auto dec = make_decomposer(AgentGraph::line(2), 2, 2, cfg, 12);
    auto rng = make_rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Obs obs(2, std::vector<double>(2));
    std::vector<int> action{0, 1};
    for (int iter = 0; iter < 100; ++iter) {
        for (auto &o : obs)
            for (double &v : o)
                v = gauss(rng);
        dec.train_step({{&obs, &action, 0.0}});
    }
    Obs probe = zero_obs(2, 2);
    for (size_t s = 0; s < dec.subsets().size(); ++s)
        CHECK(std::fabs(dec.subset_value(s, probe, action)) <= 1e-6);
}

TEST_CASE("rolling window arms the trained-enough latch only after it fills") {
    RdConfig cfg;
    cfg.window = 50;
    cfg.delta = 10.0; // residuals trivially below delta
    auto dec = make_decomposer(AgentGraph(1), 1, 1, cfg, 14);
    Obs obs{{0.0}};
    std::vector<int> action{0};
    RewardDecomposer::Sample s{&obs, &action, 0.1};
    for (int iter = 0; iter < 30; ++iter) {
        dec.train_step({s, s}); // two residual samples per call
        CHECK(dec.trained_enough() == (2 * (iter + 1) >= 50));
    }
    CHECK(dec.trained_enough());
}

TEST_CASE("rd bridge: fallback even split and skip-with-block-share") {
    DecoupledChainParams cp;
    cp.n = 2;
    cp.seed = 15;

    TrainerConfig cfg;
    cfg.seed = 16;
    cfg.reward_source = RewardSource::Decomposed;
    cfg.rd.delta = 0.15;
    cfg.rd.fallback = RdFallback::EvenSplit;
    auto factory = [cp] {
        auto env = std::make_unique<DecoupledChain>(cp);
        env->set_local_rewards(false);
        return env;
    };
    Trainer t(factory, cfg);
    REQUIRE(t.decomposer() != nullptr);
    DecoupledChain env(cp);
    env.set_local_rewards(false);
    Obs obs = env.reset(2);
    const auto step = env.step({0, 0});
    const auto tr = t.make_transition(obs, {0, 0}, step);
    CHECK(tr.rd_failed); // gate is closed on an untrained decomposer
    CHECK(tr.has_local);
    CHECK(tr.r_local[0] == doctest::Approx(step.r_global / 2.0));

    TrainerConfig skip_cfg = cfg;
    skip_cfg.rd.fallback = RdFallback::Skip;
    Trainer ts(factory, skip_cfg);
    const auto tr2 = ts.make_transition(obs, {0, 0}, step);
    CHECK(tr2.rd_failed);
    CHECK_FALSE(tr2.has_local);
    // block targets fall back to the block share of the global reward
    TrainerConfig probe_cfg = skip_cfg;
    probe_cfg.gamma = 0.0;
    Trainer tp(factory, probe_cfg);
    auto tr3 = tp.make_transition(obs, {0, 0}, step);
    const auto y = tp.td_targets({tr3});
    CHECK(y[0][0] == doctest::Approx(step.r_global / 2.0));
    CHECK(y[0][1] == doctest::Approx(step.r_global / 2.0));
}

TEST_CASE("successful inference stores locals summing to the subset total") {
    DecoupledChainParams cp;
    cp.n = 2;
    cp.seed = 17;
    TrainerConfig cfg;
    cfg.seed = 18;
    cfg.reward_source = RewardSource::Decomposed;
    cfg.rd.delta = 5.0; // generous gate
    cfg.rd.window = 4;
    auto factory = [cp] {
        auto env = std::make_unique<DecoupledChain>(cp);
        env->set_local_rewards(false);
        return env;
    };
    Trainer t(factory, cfg);
    DecoupledChain env(cp);
    env.set_local_rewards(false);
    Obs obs = env.reset(3);
    const auto step = env.step({0, 1});
    // a couple of training calls fill the window and flip the latch
    std::vector<int> action{0, 1};
    for (int k = 0; k < 4; ++k)
        t.decomposer()->train_step({{&obs, &action, step.r_global}});
    REQUIRE(t.decomposer()->trained_enough());
    const auto tr = t.make_transition(obs, action, step);
    CHECK_FALSE(tr.rd_failed);
    REQUIRE(tr.has_local);
    double total = 0.0;
    for (size_t s = 0; s < t.decomposer()->subsets().size(); ++s)
        total += t.decomposer()->subset_value(s, obs, action);
    CHECK(tr.r_local[0] + tr.r_local[1] == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("decomposer training errors on invalid input") {
    RdConfig cfg;
    auto dec = make_decomposer(AgentGraph(1), 1, 2, cfg);
    CHECK_THROWS_AS(dec.train_step({}), std::invalid_argument);
    Obs bad_obs{{0.0, 0.0}}; // wrong arity
    std::vector<int> action{0};
    CHECK_THROWS_AS(dec.predict_global(bad_obs, action), std::invalid_argument);
    Obs obs{{0.0}};
    std::vector<int> bad_action{5};
    CHECK_THROWS_AS(dec.predict_global(obs, bad_action), std::invalid_argument);
}
