#pragma once

#include <random>

#include "env.hpp"

namespace lomaq {

/// One small tabular MDP: reward[s][a], transition[s][a] a distribution over
/// next states.
struct TabularMdp {
    int num_states = 2;
    int num_actions = 2;
    std::vector<std::vector<double>> reward;                  // [s][a]
    std::vector<std::vector<std::vector<double>>> transition; // [s][a][s']
};

TabularMdp random_tabular_mdp(int states, int actions, std::mt19937_64 &rng);

// Optimal Q table of one copy, solved to sup-norm tolerance 1e-10.
std::vector<std::vector<double>> value_iteration(const TabularMdp &mdp, double gamma);

struct DecoupledChainParams {
    int n = 2;
    int states = 3;  // <= 5
    int actions = 2; // <= 5
    long horizon = 25;
    uint64_t seed = 0; // draws the per-copy MDPs
};

/// n independent copies of a random tabular MDP; the agent graph is edgeless
/// and the global transition factorizes per copy. Episodes are horizon-capped
/// rollout windows, never terminal.
class DecoupledChain final : public Env {
public:
    explicit DecoupledChain(const DecoupledChainParams &p);
    DecoupledChain(std::vector<TabularMdp> copies, long horizon);

    std::string name() const override { return "decoupled_chain"; }
    int num_agents() const override { return static_cast<int>(copies_.size()); }
    int obs_dim(int agent) const override { return copies_[agent].num_states; }
    int num_actions(int agent) const override { return copies_[agent].num_actions; }
    const AgentGraph &graph() const override { return graph_; }
    long default_horizon() const override { return horizon_; }

    Obs reset(uint64_t seed) override;
    EnvStep step(const std::vector<int> &action) override;

    const std::vector<TabularMdp> &copies() const { return copies_; }
    const std::vector<int> &states() const { return states_; }
    void set_states(const std::vector<int> &states);

    // Per-copy optimal Q tables at the given discount.
    std::vector<std::vector<std::vector<double>>> value_iteration_oracle(double gamma) const;

private:
    Obs observe() const;

    std::vector<TabularMdp> copies_;
    long horizon_;
    AgentGraph graph_;
    std::vector<int> states_;
    long t_ = 0;
    bool episode_over_ = true;
    std::mt19937_64 rng_;
};

} // namespace lomaq
