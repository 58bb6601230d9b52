// Slower end-to-end training checks (tens of seconds); kept out of the quick
// unit binaries.

#include <doctest.h>

#include <algorithm>
#include <memory>

#include "decoupled_chain.hpp"
#include "matrix_game.hpp"
#include "qsm.hpp"
#include "rng.hpp"
#include "trainer.hpp"

using namespace lomaq;

TEST_CASE("50k steps on a two-copy chain recover the value-iteration policy") {
    DecoupledChainParams cp;
    cp.n = 2;
    cp.states = 3;
    cp.actions = 2;
    cp.seed = 42;
    cp.horizon = 25;
    TrainerConfig cfg;
    cfg.seed = 0;
    cfg.gamma = 0.9;
    cfg.eps_anneal_steps = 20000;
    cfg.eval_interval = 0;
    Trainer t([cp] { return std::make_unique<DecoupledChain>(cp); }, cfg);
    t.run_training(50000);

    DecoupledChain env(cp);
    const auto oracle = env.value_iteration_oracle(cfg.gamma);
    int match = 0, total = 0;
    for (int s0 = 0; s0 < 3; ++s0)
        for (int s1 = 0; s1 < 3; ++s1) {
            Obs obs(2);
            obs[0].assign(3, 0.0);
            obs[0][s0] = 1.0;
            obs[1].assign(3, 0.0);
            obs[1][s1] = 1.0;
            const auto greedy = t.greedy_action(obs);
            const int state[2] = {s0, s1};
            bool ok = true;
            for (int i = 0; i < 2; ++i) {
                int arg = 0;
                for (int a = 1; a < 2; ++a)
                    if (oracle[i][state[i]][a] > oracle[i][state[i]][arg])
                        arg = a;
                ok = ok && greedy[i] == arg;
            }
            match += ok;
            ++total;
        }
    // >= 95% of states
    CHECK(match * 100 >= total * 95);
}

TEST_CASE("soft-trained mixer converges to a near-monotone map on monotone targets") {
    TrainerConfig cfg;
    cfg.mode = MonotonicityMode::Soft;
    cfg.lambda_mono = 1.0;
    cfg.lr = 0.002;
    cfg.gamma = 0.0;
    cfg.eps_start = cfg.eps_end = 1.0;
    cfg.eval_interval = 0;
    cfg.seed = 3;
    cfg.partition = Partition::joint(2);
    Trainer t([] { return std::make_unique<MatrixGame>(); }, cfg);
    t.run_training(20000);
    auto rng = make_rng(4);
    CHECK(monotone_gradient_check(t.mixer(0), 500, rng, 1e-2) <= 1e-3);
}
