#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "env.hpp"
#include "nn.hpp"

namespace lomaq {

enum class RdFallback { EvenSplit, Skip };

struct RdConfig {
    int max_card = 1;
    double lr = 0.01;        // adam
    double delta = -1.0;     // tolerance gate; < 0 resolves to 0.1 * n
    double lambda = 0.0;     // L1 pressure on subset outputs
    std::vector<double> weights; // w(|I|) by cardinality (1-based); empty -> w(1)=0, w(k)=k-1
    int batch_size = 5;
    int window = 500; // rolling residual window driving the trained-enough gate
    RdFallback fallback = RdFallback::EvenSplit;
    bool share_by_cardinality = true;
    int hidden1 = 64;
    int hidden2 = 128;
    int hidden3 = 128;
    long train_interval = 1;
};

/// Deduplicated union over agents of the subsets of their closed neighborhoods,
/// capped at max_card members. Every singleton is always present.
std::vector<std::vector<int>> build_subset_family(const AgentGraph &graph, int max_card);

/// Per-subset reward approximators r_I trained so that sum_I r_I tracks the
/// global reward, with an L1 penalty that grows with subset cardinality. Local
/// rewards are inferred by giving each member 1/|I| of its subsets' outputs.
class RewardDecomposer {
public:
    struct Sample {
        const Obs *obs = nullptr;
        const std::vector<int> *action = nullptr;
        double r_global = 0.0;
    };

    RewardDecomposer(const AgentGraph &graph, const std::vector<int> &obs_dims,
                     const std::vector<int> &action_counts, const RdConfig &cfg, uint64_t seed);

    int num_agents() const { return static_cast<int>(obs_dims_.size()); }
    const std::vector<std::vector<int>> &subsets() const { return subsets_; }
    const RdConfig &config() const { return cfg_; }
    double delta() const { return delta_; }
    double weight(int cardinality) const;

    double subset_value(size_t subset_index, const Obs &obs, const std::vector<int> &action) const;
    double predict_global(const Obs &obs, const std::vector<int> &action) const;

    // One Adam step on the batch; returns the mean loss. Feeds the rolling
    // residual window that arms the trained-enough gate.
    double train_step(const std::vector<Sample> &batch);

    // Tolerance-gated inference; nullopt signals decomposition failure.
    // On success the returned rewards sum to sum_I r_I exactly (1/|I| shares).
    std::optional<std::vector<double>> infer_local(const Obs &obs, const std::vector<int> &action,
                                                   double r_global) const;

    bool trained_enough() const { return trained_enough_; }
    double rolling_residual_mean() const;

    size_t num_nets() const { return nets_.size(); }
    Mlp &net(size_t index) { return nets_.at(index); }
    size_t net_index_of_subset(size_t subset_index) const { return net_of_[subset_index]; }

private:
    std::vector<double> assemble_input(const std::vector<int> &subset, const Obs &obs,
                                       const std::vector<int> &action) const;

    RdConfig cfg_;
    std::vector<int> obs_dims_;
    std::vector<int> action_counts_;
    std::vector<std::vector<int>> subsets_;
    std::vector<size_t> net_of_; // subset -> net index (shared by cardinality or 1:1)
    std::vector<Mlp> nets_;
    Optimizer opt_;
    double delta_ = 0.0;
    std::deque<double> residual_window_;
    bool trained_enough_ = false;
};

} // namespace lomaq
