#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "dense.hpp"
#include "graph.hpp"

namespace lomaq {

/// beta_J(t, delta): squared confidence radius for block J,
/// sqrt(beta) = sqrt(lambda)*|J|*S_theta + R_max*sqrt(d*log(|P| K^{|J|} (1+t*S_x)/lambda / delta)).
double beta_j(long t, double delta, int block_size, int num_blocks, int actions_per_agent, int dim,
              double lambda, double s_x, double s_theta, double r_max);

/// Stochastic contextual environment with known per-(agent, action) parameter
/// vectors. Parameters are scaled at construction so that the expected reward
/// of ANY agent subset stays in [-1, 1] for every reachable context, which
/// keeps every partition's block rewards inside the required range.
class LinearBanditEnv {
public:
    struct Params {
        int n = 2;
        int actions = 2; // K
        int dim = 2;     // d
        double sigma = 0.1;
        double s_x = 1.0;
        uint64_t seed = 0;
    };

    explicit LinearBanditEnv(const Params &p);
    // Exact parameter injection (tests). No rescaling is applied.
    LinearBanditEnv(std::vector<std::vector<std::vector<double>>> theta_star, double sigma,
                    double s_x, uint64_t seed);

    int num_agents() const { return n_; }
    int num_actions() const { return k_; }
    int dim() const { return d_; }
    double s_x() const { return s_x_; }
    double s_theta() const { return s_theta_; }
    double sigma() const { return sigma_; }
    std::span<const double> theta(int agent, int action) const;

    // Context uniform on the sphere of radius s_x.
    std::vector<double> next_context();

    // Noisy block rewards r_J = sum_{i in J} <x, theta*_{i,a_i}> + eta_J.
    std::vector<double> block_rewards(std::span<const double> x, const std::vector<int> &action,
                                      const Partition &p);

    double expected_agent_reward(std::span<const double> x, int agent, int action) const;

    // Per-agent optimal action under x (exact enumeration per agent).
    std::vector<int> best_action(std::span<const double> x) const;

    // Sum over agents of the optimality gap of `action`; always >= 0.
    double instantaneous_regret(std::span<const double> x, const std::vector<int> &action) const;

private:
    int n_, k_, d_;
    double sigma_, s_x_, s_theta_;
    std::vector<std::vector<std::vector<double>>> theta_; // [agent][action][dim]
    std::mt19937_64 rng_;
};

/// Multi-OFUL state: one ridge estimator per (block, joint sub-action).
class MultiOful {
public:
    struct Config {
        double alpha = 1.0;
        double lambda = 1.0;
        double delta = 0.1;
        // operations whose cost scales with T * K^{max |J|} refuse to start past this
        double enumeration_budget = 5e8;
    };

    MultiOful(const Partition &partition, int actions_per_agent, int dim, const Config &cfg,
              double s_x, double s_theta, double r_max);

    // Per block: argmax over sub-actions of <x, theta_hat> + alpha * sqrt(beta) * |x|_{V^-1};
    // ties resolve to the lexicographically smallest sub-action.
    std::vector<int> select_action(std::span<const double> x);

    // Rank-1 update of the played sub-arm of every block.
    void update(std::span<const double> x, const std::vector<int> &action,
                std::span<const double> block_rewards);

    double beta(int block) const;
    long step() const { return t_; }
    const Partition &partition() const { return partition_; }
    long total_sub_arms() const;

    std::vector<double> theta_hat(int block, int sub_arm) const;
    const Dense2D &gram(int block, int sub_arm) const;

    // |theta_ref - theta_hat|_{V} <= sqrt(beta) for every sub-arm of every block?
    bool contains_truth(const LinearBanditEnv &env) const;

    // index of a_J within block `b` under lexicographic enumeration
    int sub_arm_index(int block, const std::vector<int> &action) const;

private:
    struct Arm {
        Dense2D gram;     // V
        Dense2D gram_inv; // maintained by Sherman-Morrison, refactored periodically
        std::vector<double> response; // Y
        long updates = 0;
    };

    double beta_at(int block, long t) const;

    Partition partition_;
    int k_, d_;
    Config cfg_;
    double s_x_, s_theta_, r_max_;
    long t_ = 0;
    std::vector<std::vector<Arm>> arms_; // [block][sub_arm]
};

struct BanditRunResult {
    std::vector<double> cumulative_regret; // one entry per step
    bool coverage_ok = true;               // only meaningful when check_coverage was set
};

struct BanditRunOptions {
    bool check_coverage = false;
};

/// One seeded experiment. The naive joint-arm baseline is the same call with
/// Partition::joint(n).
BanditRunResult run_bandit_experiment(const LinearBanditEnv::Params &env_params,
                                      const Partition &partition, const MultiOful::Config &cfg,
                                      long horizon, uint64_t seed,
                                      const BanditRunOptions &opts = {});

} // namespace lomaq
