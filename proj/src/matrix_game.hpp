#pragma once

#include <array>

#include "env.hpp"

namespace lomaq {

using PayoffTable = std::array<std::array<double, 2>, 2>;

struct MatrixGameTables {
    PayoffTable q1;      // a1 + a2
    PayoffTable q2;      // 1 + max(0, 1 - a1 - a2)
    PayoffTable qglobal; // 2 + max(0, a1 + a2 - 1) = q1 + q2
};

MatrixGameTables matrix_game_tables();

/// Two-agent, two-action one-shot game with per-agent payoff channels.
/// Episodes last a single step; meant to be trained with gamma = 0.
class MatrixGame final : public Env {
public:
    MatrixGame();

    std::string name() const override { return "matrix_game"; }
    int num_agents() const override { return 2; }
    int obs_dim(int) const override { return 1; }
    int num_actions(int) const override { return 2; }
    const AgentGraph &graph() const override { return graph_; }
    long default_horizon() const override { return 1; }

    Obs reset(uint64_t seed) override;
    EnvStep step(const std::vector<int> &action) override;

private:
    AgentGraph graph_;
    bool done_ = false;
};

} // namespace lomaq
