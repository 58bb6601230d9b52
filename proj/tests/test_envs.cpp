#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "decoupled_chain.hpp"
#include "matrix_game.hpp"
#include "multi_cart_pole.hpp"
#include "navigation.hpp"
#include "rng.hpp"

using namespace lomaq;

namespace {

void check_local_sums(Env &env, int episodes, uint64_t seed) {
    auto rng = make_rng(seed, 77);
    for (int ep = 0; ep < episodes; ++ep) {
        env.reset(seed + ep);
        for (int t = 0; t < 200; ++t) {
            std::vector<int> action(static_cast<size_t>(env.num_agents()));
            for (int i = 0; i < env.num_agents(); ++i)
                action[i] = static_cast<int>(rng() % env.num_actions(i));
            const auto step = env.step(action);
            REQUIRE(step.r_local.has_value());
            double sum = 0.0;
            for (double r : *step.r_local)
                sum += r;
            CHECK(sum == doctest::Approx(step.r_global).epsilon(0).scale(1).epsilon(1e-9));
            if (step.done || step.truncated)
                break;
        }
    }
}

} // namespace

TEST_CASE("matrix game tables match their closed forms") {
    const auto t = matrix_game_tables();
    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < 2; ++a2) {
            CHECK(t.q1[a1][a2] == a1 + a2);
            CHECK(t.q2[a1][a2] == 1.0 + std::max(0, 1 - a1 - a2));
            CHECK(t.qglobal[a1][a2] == t.q1[a1][a2] + t.q2[a1][a2]);
        }
    CHECK(t.q1[0][0] == 0);
    CHECK(t.q1[1][1] == 2);
    CHECK(t.q2[0][0] == 2);
    CHECK(t.q2[1][0] == 1);
    CHECK(t.qglobal[1][1] == 3);
    CHECK(t.qglobal[0][1] == 2);
}

TEST_CASE("matrix game is a single-step episode with per-agent channels") {
    MatrixGame game;
    game.reset(0);
    auto step = game.step({1, 0});
    CHECK(step.r_global == 2.0);
    REQUIRE(step.r_local.has_value());
    CHECK((*step.r_local)[0] == 1.0);
    CHECK((*step.r_local)[1] == 1.0);
    CHECK(step.done);
    CHECK_THROWS_AS(game.step({0, 0}), std::logic_error);
    game.reset(0);
    CHECK_THROWS_AS(game.step({2, 0}), std::invalid_argument);
}

TEST_CASE("same seed gives identical resets") {
    CartPoleParams cp;
    cp.n = 3;
    CoupledMultiCartPole env(cp);
    CHECK(env.reset(5) == env.reset(5));

    DecoupledChainParams dc;
    dc.seed = 3;
    DecoupledChain chain(dc);
    CHECK(chain.reset(9) == chain.reset(9));

    auto nav_p = nav2_params();
    BoundedCooperativeNavigation nav(nav_p);
    CHECK(nav.reset(2) == nav.reset(2));
}

TEST_CASE("cart-pole reset starts upright and in-range") {
    CartPoleParams p;
    p.n = 4;
    CoupledMultiCartPole env(p);
    env.reset(11);
    const double fail = p.fail_angle_deg * std::numbers::pi / 180.0;
    for (int i = 0; i < p.n; ++i) {
        CHECK(std::fabs(env.carts()[i].theta) < fail);
        CHECK(std::fabs(env.carts()[i].theta) <= 0.05);
        CHECK(std::fabs(env.carts()[i].x - p.rest_spacing * i) <= 0.05);
    }
}

TEST_CASE("upright poles score one each; global equals count of upright poles") {
    CartPoleParams p;
    p.n = 3;
    CoupledMultiCartPole env(p);
    env.reset(1);
    const auto step = env.step({0, 1, 0});
    CHECK(step.r_global == 3.0);
    REQUIRE(step.r_local.has_value());
    for (double r : *step.r_local)
        CHECK(r == 1.0);
}

TEST_CASE("balanced pole with no force and no spring stays stationary") {
    CartPoleParams p;
    p.n = 1;
    p.spring_k = 0.0;
    const CartState rest{}; // all zeros
    const auto [x_acc, theta_acc] = cart_pole_accel(rest, 0.0, p);
    CHECK(x_acc == 0.0);
    CHECK(theta_acc == 0.0);
}

TEST_CASE("fallen pole is latched, stops scoring, episode ends when all fall") {
    CartPoleParams p;
    p.n = 2;
    p.horizon = 100000;
    CoupledMultiCartPole env(p);
    env.reset(3);
    bool saw_partial = false;
    for (int t = 0; t < 100000; ++t) {
        const auto step = env.step({0, 0}); // constant leftward force topples poles
        const int upright = static_cast<int>(step.r_global);
        if (upright == 1)
            saw_partial = true;
        if (!env.alive(0))
            CHECK((*step.r_local)[0] == 0.0);
        if (step.done) {
            CHECK(upright == 0);
            break;
        }
        REQUIRE(t < 5000); // must topple well before this
    }
    CHECK(saw_partial);
    CHECK_THROWS_AS(env.step({0, 0}), std::logic_error);
}

TEST_CASE("cart-pole truncates at horizon without terminal flag") {
    CartPoleParams p;
    p.n = 1;
    p.horizon = 5;
    CoupledMultiCartPole env(p);
    env.reset(8);
    EnvStep last;
    for (int t = 0; t < 5; ++t)
        last = env.step({t % 2});
    CHECK(last.truncated);
    CHECK_FALSE(last.done);
}

TEST_CASE("navigation: reset keeps agents at home inside their regions") {
    NavigationParams p;
    p.n = 4;
    p.seed = 13;
    BoundedCooperativeNavigation env(p);
    env.reset(21);
    for (int i = 0; i < p.n; ++i)
        CHECK(distance(env.positions()[i], env.homes()[i]) <= p.region_radius + 1e-12);
}

TEST_CASE("navigation region constraint holds after every step") {
    NavigationParams p;
    p.n = 3;
    p.seed = 5;
    p.horizon = 40;
    BoundedCooperativeNavigation env(p);
    env.reset(1);
    auto rng = make_rng(2);
    for (int t = 0; t < 40; ++t) {
        std::vector<int> action(3);
        for (auto &a : action)
            a = static_cast<int>(rng() % 5);
        const auto step = env.step(action);
        for (int i = 0; i < 3; ++i)
            CHECK(distance(env.positions()[i], env.homes()[i]) <= p.region_radius + 1e-9);
        if (step.truncated)
            break;
    }
}

TEST_CASE("navigation overlap graph matches region geometry") {
    NavigationParams p;
    p.n = 6;
    p.seed = 31;
    BoundedCooperativeNavigation env(p);
    for (int i = 0; i < p.n; ++i)
        for (int j = i + 1; j < p.n; ++j) {
            const bool overlap =
                distance(env.homes()[i], env.homes()[j]) < 2.0 * p.region_radius;
            CHECK(env.graph().has_edge(i, j) == overlap);
        }
}

TEST_CASE("navigation rewards: uncovered landmarks give zero, shared landmark counts once") {
    auto p = nav2_params();
    BoundedCooperativeNavigation env(p);
    env.reset(0);

    // both agents far from the landmark
    env.teleport({{0.1, 0.5}, {0.9, 0.5}});
    auto step = env.step({0, 0});
    CHECK(step.r_global == 0.0);

    // both agents on the single landmark: still one point, nearest agent takes it
    env.teleport({{0.5, 0.5}, {0.52, 0.5}});
    step = env.step({0, 0});
    CHECK(step.r_global == 1.0);
    REQUIRE(step.r_local.has_value());
    CHECK((*step.r_local)[0] == 1.0);
    CHECK((*step.r_local)[1] == 0.0);
}

TEST_CASE("navigation local credit goes to the nearest covering agent, ties to lowest index") {
    auto p = nav2_params();
    BoundedCooperativeNavigation env(p);
    env.reset(0);
    env.teleport({{0.56, 0.5}, {0.53, 0.5}}); // agent 1 closer
    auto [global, local] = env.score();
    CHECK(global == 1.0);
    CHECK(local[1] == 1.0);
    env.teleport({{0.46, 0.5}, {0.54, 0.5}}); // exact tie
    auto [g2, l2] = env.score();
    CHECK(g2 == 1.0);
    CHECK(l2[0] == 1.0);
    CHECK(l2[1] == 0.0);
}

TEST_CASE("local rewards sum to the global reward in every environment") {
    CartPoleParams cp;
    cp.n = 3;
    CoupledMultiCartPole cart(cp);
    check_local_sums(cart, 3, 100);

    NavigationParams np;
    np.n = 3;
    np.seed = 7;
    BoundedCooperativeNavigation nav(np);
    check_local_sums(nav, 3, 200);

    DecoupledChainParams dp;
    dp.n = 3;
    dp.seed = 8;
    DecoupledChain chain(dp);
    check_local_sums(chain, 3, 300);

    MatrixGame game;
    check_local_sums(game, 5, 400);
}

TEST_CASE("global-only mode hides local channels") {
    MatrixGame game;
    game.set_local_rewards(false);
    game.reset(0);
    CHECK_FALSE(game.step({0, 0}).r_local.has_value());
}

TEST_CASE("value iteration: single-state MDP gives r/(1-gamma)") {
    TabularMdp mdp;
    mdp.num_states = 1;
    mdp.num_actions = 2;
    mdp.reward = {{0.4, 1.0}};
    mdp.transition = {{{1.0}, {1.0}}};
    const auto q = value_iteration(mdp, 0.9);
    CHECK(q[0][0] == doctest::Approx(0.4 + 0.9 * 10.0).epsilon(1e-9));
    CHECK(q[0][1] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("value iteration matches a hand-solved two-state chain") {
    // states {0,1}, actions {stay, go}; stay pays 0 in s0 and 1 in s1,
    // go moves 0->1 for 0.2 and 1->0 for nothing; gamma = 0.5
    TabularMdp mdp;
    mdp.num_states = 2;
    mdp.num_actions = 2;
    mdp.reward = {{0.0, 0.2}, {1.0, 0.0}};
    mdp.transition = {{{1.0, 0.0}, {0.0, 1.0}}, {{0.0, 1.0}, {1.0, 0.0}}};
    const auto q = value_iteration(mdp, 0.5);
    CHECK(q[0][0] == doctest::Approx(0.6).epsilon(1e-10));
    CHECK(q[0][1] == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(q[1][0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(q[1][1] == doctest::Approx(0.6).epsilon(1e-10));
}

TEST_CASE("decoupled chain: argmax of summed Q equals per-copy argmaxes") {
    DecoupledChainParams p;
    p.n = 3;
    p.states = 3;
    p.actions = 3;
    p.seed = 17;
    DecoupledChain env(p);
    const auto oracle = env.value_iteration_oracle(0.9);
    auto rng = make_rng(18);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> state(3);
        for (auto &s : state)
            s = static_cast<int>(rng() % 3);
        // exhaustive argmax over joint actions of the summed Q
        std::vector<int> best_joint(3, 0);
        double best_val = -1e18;
        for (int a0 = 0; a0 < 3; ++a0)
            for (int a1 = 0; a1 < 3; ++a1)
                for (int a2 = 0; a2 < 3; ++a2) {
                    const double v = oracle[0][state[0]][a0] + oracle[1][state[1]][a1] +
                                     oracle[2][state[2]][a2];
                    if (v > best_val) {
                        best_val = v;
                        best_joint = {a0, a1, a2};
                    }
                }
        for (int i = 0; i < 3; ++i) {
            int arg = 0;
            for (int a = 1; a < 3; ++a)
                if (oracle[i][state[i]][a] > oracle[i][state[i]][arg])
                    arg = a;
            CHECK(arg == best_joint[i]);
        }
    }
    CHECK_THROWS_AS(value_iteration(env.copies()[0], 1.0), std::invalid_argument);
}

TEST_CASE("chain steps sample valid states and truncate at horizon") {
    DecoupledChainParams p;
    p.n = 2;
    p.horizon = 10;
    p.seed = 23;
    DecoupledChain env(p);
    env.reset(1);
    EnvStep last;
    for (int t = 0; t < 10; ++t) {
        last = env.step({0, 1});
        for (int i = 0; i < 2; ++i) {
            CHECK(env.states()[i] >= 0);
            CHECK(env.states()[i] < p.states);
        }
    }
    CHECK(last.truncated);
    CHECK_FALSE(last.done);
    CHECK_THROWS_AS(env.step({0, 0}), std::logic_error);
}
