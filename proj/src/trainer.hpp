#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "env.hpp"
#include "graph.hpp"
#include "nn.hpp"
#include "reward_decomp.hpp"

namespace lomaq {

enum class MonotonicityMode { Hard, Soft };
enum class RewardSource { Local, GlobalEvenSplit, Decomposed };

struct Transition {
    Obs obs;
    Obs next_obs;
    std::vector<int> action;
    std::vector<double> r_local; // valid when has_local
    double r_global = 0.0;
    bool has_local = false;
    bool rd_failed = false;
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity);
    void push(Transition t);
    size_t size() const { return store_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition &at(size_t i) const { return store_[i]; }
    const Transition &sample(std::mt19937_64 &rng) const;

private:
    size_t capacity_;
    size_t next_ = 0;
    std::vector<Transition> store_;
};

/// Per-agent utility approximators; optionally one shared net with a one-hot
/// agent id appended to the observation.
struct UtilityNets {
    bool shared = false;
    int n = 0;
    std::vector<int> obs_dims;
    std::vector<int> action_counts;
    std::vector<Mlp> nets; // size 1 when shared, else n

    std::vector<double> input_for(int agent, std::span<const double> obs) const;
    std::vector<double> values(int agent, std::span<const double> obs) const;
    std::vector<double> values(int agent, std::span<const double> obs, ForwardCache &cache) const;
    Mlp &net_for(int agent) { return nets[shared ? 0 : static_cast<size_t>(agent)]; }
    const Mlp &net_for(int agent) const { return nets[shared ? 0 : static_cast<size_t>(agent)]; }
};

// a_i = argmax_a U_i(obs_i)[a], ties to the lowest action index. Reads only
// agent-local observations.
std::vector<int> greedy_joint_action(const UtilityNets &nets, const Obs &obs);

// One global exploration coin by default: with probability eps a uniformly
// random joint action, otherwise the greedy one. Per-agent coins optional.
std::vector<int> epsilon_greedy(const std::vector<int> &greedy, double eps,
                                const std::vector<int> &action_counts, std::mt19937_64 &rng,
                                bool per_agent = false);

struct EvalStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Decentralized greedy execution over `episodes` episodes; the policy sees
/// observations only. Episode returns are undiscounted sums of r_global.
EvalStats evaluate_policy(Env &env, const std::function<std::vector<int>(const Obs &)> &policy,
                          int episodes, uint64_t seed_base);

struct TrainerConfig {
    std::optional<Partition> partition; // default singletons
    int kappa = 1;
    double gamma = 0.99;
    double eps_start = 1.0;
    double eps_end = 0.05;
    long eps_anneal_steps = 100000;
    double lr = 0.0005;
    long target_period_episodes = 50;
    int batch_size = 50;
    MonotonicityMode mode = MonotonicityMode::Hard;
    double lambda_mono = 0.001;
    int utility_hidden = 64;
    int mixing_hidden = 32;
    bool share_utilities = true;
    bool share_mixers = true;
    bool use_mixers = true; // false gives IQL: per-agent TD on the utilities alone
    bool per_agent_exploration = false;
    RewardSource reward_source = RewardSource::Local;
    long replay_capacity = 0; // 0 -> min(5000 * horizon, 250000)
    long train_interval = 1;
    long warmup = 0; // 0 -> batch_size
    long eval_interval = 10000;
    int eval_episodes = 20;
    uint64_t seed = 0;
    RdConfig rd;
};

using EnvFactory = std::function<std::unique_ptr<Env>()>;

struct TrainCallbacks {
    std::function<void(long step, const EvalStats &)> on_eval;
    std::function<void(long step)> post_train_step;
};

struct RunSummary {
    long steps = 0;
    long episodes = 0;
    long target_refreshes = 0;
    long train_steps = 0;
    std::vector<std::pair<long, EvalStats>> evals;
};

/// LOMAQ: per-agent utilities mixed per partition block by monotone networks
/// wired over kappa-hop input sets, trained on per-block TD targets from local
/// rewards (given, evenly split, or learned) with a target copy refreshed every
/// L episodes. Execution (greedy and evaluation) reads utilities only.
class Trainer {
public:
    Trainer(EnvFactory factory, TrainerConfig cfg);

    // --- acting ---
    std::vector<int> greedy_action(const Obs &obs) const;
    std::vector<int> explore_action(const std::vector<int> &greedy, double eps);
    double epsilon_at(long step) const;

    // --- learning ---
    // Per-block targets for a batch: y[J] = sum_{j in J} r_j + gamma * F_J^-(argmax utilities),
    // bootstrap dropped on terminal transitions. Block share (|J|/n) * r_global
    // substitutes when a transition carries no local rewards.
    std::vector<std::vector<double>> td_targets(const std::vector<Transition> &batch) const;
    double train_step();                                        // samples the replay buffer
    double train_step_on(const std::vector<Transition> &batch); // frozen-batch variant
    double last_penalty() const { return last_penalty_; }

    // Mean squared TD loss (plus the weighted soft penalty) and, when grad
    // sinks are given, its exact parameter gradients. Targets are computed
    // from the frozen copies and held constant.
    double compute_loss_and_grads(const std::vector<Transition> &batch,
                                  std::vector<MlpGrads> *util_grads,
                                  std::vector<MlpGrads> *mixer_grads) const;

    RunSummary run_training(long steps, const TrainCallbacks &cb = {});
    EvalStats evaluate(int episodes = -1); // -1 -> config value

    // --- wiring / state access ---
    Env &env() { return *env_; }
    const Partition &partition() const { return partition_; }
    const TrainerConfig &config() const { return cfg_; }
    int num_agents() const { return n_; }
    const std::vector<int> &block_inputs(int block) const { return blocks_[block].inputs; }
    int mixer_group_of_block(int block) const { return blocks_[block].group; }
    size_t num_mixer_groups() const { return mixers_.size(); }
    Mlp &mixer(size_t group) { return mixers_[group]; }
    const Mlp &mixer(size_t group) const { return mixers_[group]; }
    UtilityNets &utilities() { return utils_; }
    const UtilityNets &utilities() const { return utils_; }
    double min_mixer_weight() const;
    long episodes_done() const { return episodes_done_; }
    long target_refreshes() const { return target_refreshes_; }
    long steps_taken() const { return steps_taken_; }
    ReplayBuffer &replay() { return replay_; }
    RewardDecomposer *decomposer() { return decomposer_ ? &*decomposer_ : nullptr; }

    // Block value F_J at explicit utility inputs (testing / table extraction).
    double block_value(int block, std::span<const double> inputs) const;
    // Chosen-action utilities u_i = U_i(obs_i)[a_i] under the current parameters.
    std::vector<double> chosen_utilities(const Obs &obs, const std::vector<int> &action) const;

    void refresh_targets();
    void save_checkpoint(const std::string &path) const;
    void load_checkpoint(const std::string &path);

    // Converts one environment step into a stored transition, applying the
    // reward source (even split / learned decomposition with fallback).
    Transition make_transition(const Obs &obs, const std::vector<int> &action,
                               const EnvStep &step);

private:
    struct BlockInfo {
        std::vector<int> members;
        std::vector<int> inputs; // sorted block_input_set(J, kappa)
        int group = 0;
    };

    void build_nets();
    std::vector<double> td_targets_one(const Transition &tr) const;
    double rd_train_maybe();

    EnvFactory factory_;
    TrainerConfig cfg_;
    std::unique_ptr<Env> env_;
    std::unique_ptr<Env> eval_env_;
    int n_ = 0;
    Partition partition_;
    std::vector<BlockInfo> blocks_;
    UtilityNets utils_, target_utils_;
    std::vector<Mlp> mixers_, target_mixers_;
    Optimizer opt_;
    ReplayBuffer replay_;
    std::optional<RewardDecomposer> decomposer_;
    std::mt19937_64 explore_rng_, replay_rng_, rd_rng_;
    long steps_taken_ = 0;
    long episodes_done_ = 0;
    long target_refreshes_ = 0;
    long train_steps_ = 0;
    mutable double last_penalty_ = 0.0;
};

} // namespace lomaq
