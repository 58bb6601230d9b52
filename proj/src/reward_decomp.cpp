#include "reward_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "errors.hpp"
#include "rng.hpp"

namespace lomaq {

std::vector<std::vector<int>> build_subset_family(const AgentGraph &graph, int max_card) {
    if (max_card < 1)
        throw std::invalid_argument("build_subset_family: max_card must be >= 1");
    std::set<std::vector<int>> family;
    for (int i = 0; i < graph.num_agents(); ++i) {
        const auto closed = graph.closed_neighborhood(i);
        const std::vector<int> pool(closed.begin(), closed.end());
        // all subsets of the closed neighborhood with 1..max_card members
        std::vector<int> combo;
        auto recurse = [&](auto &&self, size_t start) -> void {
            if (!combo.empty())
                family.insert(combo);
            if (static_cast<int>(combo.size()) == max_card)
                return;
            for (size_t k = start; k < pool.size(); ++k) {
                combo.push_back(pool[k]);
                self(self, k + 1);
                combo.pop_back();
            }
        };
        recurse(recurse, 0);
    }
    return {family.begin(), family.end()};
}

RewardDecomposer::RewardDecomposer(const AgentGraph &graph, const std::vector<int> &obs_dims,
                                   const std::vector<int> &action_counts, const RdConfig &cfg,
                                   uint64_t seed)
    : cfg_(cfg), obs_dims_(obs_dims), action_counts_(action_counts),
      subsets_(build_subset_family(graph, cfg.max_card)),
      opt_(OptimizerConfig{OptimizerKind::Adam, cfg.lr}) {
    if (static_cast<int>(obs_dims.size()) != graph.num_agents() ||
        action_counts.size() != obs_dims.size())
        throw std::invalid_argument("RewardDecomposer: per-agent dims mismatch");
    delta_ = cfg.delta >= 0.0 ? cfg.delta : 0.1 * static_cast<double>(obs_dims.size());

    bool homogeneous = true;
    for (size_t i = 1; i < obs_dims_.size(); ++i)
        homogeneous = homogeneous && obs_dims_[i] == obs_dims_[0] &&
                      action_counts_[i] == action_counts_[0];
    const bool share = cfg.share_by_cardinality && homogeneous;

    auto rng = make_rng(seed, 500);
    net_of_.resize(subsets_.size());
    std::vector<int> card_to_net(static_cast<size_t>(cfg.max_card) + 1, -1);
    for (size_t s = 0; s < subsets_.size(); ++s) {
        const int card = static_cast<int>(subsets_[s].size());
        if (share && card_to_net[card] >= 0) {
            net_of_[s] = static_cast<size_t>(card_to_net[card]);
            continue;
        }
        int in_dim = 0;
        for (int agent : subsets_[s])
            in_dim += obs_dims_[agent] + action_counts_[agent];
        Mlp net({in_dim, cfg.hidden1, cfg.hidden2, cfg.hidden3, 1},
                {Activation::Relu, Activation::LeakyRelu, Activation::Tanh, Activation::Identity},
                rng);
        net.zero_last_layer(); // predictions start exactly at 0
        nets_.push_back(std::move(net));
        net_of_[s] = nets_.size() - 1;
        if (share)
            card_to_net[card] = static_cast<int>(nets_.size() - 1);
    }
    for (auto &net : nets_)
        opt_.attach(net);
}

double RewardDecomposer::weight(int cardinality) const {
    if (!cfg_.weights.empty()) {
        const size_t idx = static_cast<size_t>(cardinality) - 1;
        return idx < cfg_.weights.size() ? cfg_.weights[idx] : cfg_.weights.back();
    }
    return cardinality <= 1 ? 0.0 : static_cast<double>(cardinality - 1);
}

std::vector<double> RewardDecomposer::assemble_input(const std::vector<int> &subset,
                                                     const Obs &obs,
                                                     const std::vector<int> &action) const {
    std::vector<double> x;
    for (int agent : subset) {
        const auto &o = obs.at(static_cast<size_t>(agent));
        if (static_cast<int>(o.size()) != obs_dims_[agent])
            throw std::invalid_argument("RewardDecomposer: observation arity mismatch");
        x.insert(x.end(), o.begin(), o.end());
        const int a = action.at(static_cast<size_t>(agent));
        if (a < 0 || a >= action_counts_[agent])
            throw std::invalid_argument("RewardDecomposer: action out of range");
        for (int k = 0; k < action_counts_[agent]; ++k)
            x.push_back(k == a ? 1.0 : 0.0);
    }
    return x;
}

double RewardDecomposer::subset_value(size_t subset_index, const Obs &obs,
                                      const std::vector<int> &action) const {
    const auto x = assemble_input(subsets_.at(subset_index), obs, action);
    return nets_[net_of_[subset_index]].forward(x)[0];
}

double RewardDecomposer::predict_global(const Obs &obs, const std::vector<int> &action) const {
    double total = 0.0;
    for (size_t s = 0; s < subsets_.size(); ++s)
        total += subset_value(s, obs, action);
    return total;
}

double RewardDecomposer::train_step(const std::vector<Sample> &batch) {
    if (batch.empty())
        throw std::invalid_argument("RewardDecomposer::train_step: empty batch");
    std::vector<MlpGrads> grads;
    grads.reserve(nets_.size());
    for (auto &net : nets_)
        grads.push_back(net.make_grads());

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<ForwardCache> caches(subsets_.size());
    std::vector<double> values(subsets_.size());
    for (const auto &sample : batch) {
        double pred = 0.0;
        for (size_t s = 0; s < subsets_.size(); ++s) {
            const auto x = assemble_input(subsets_[s], *sample.obs, *sample.action);
            values[s] = nets_[net_of_[s]].forward(x, caches[s])[0];
            pred += values[s];
        }
        const double residual = pred - sample.r_global;
        residual_window_.push_back(std::fabs(residual));
        while (static_cast<int>(residual_window_.size()) > cfg_.window)
            residual_window_.pop_front();
        loss += residual * residual;
        for (size_t s = 0; s < subsets_.size(); ++s) {
            const double w = weight(static_cast<int>(subsets_[s].size()));
            loss += cfg_.lambda * w * std::fabs(values[s]);
            // L1 subgradient at 0 is 0
            const double sign = values[s] > 0.0 ? 1.0 : (values[s] < 0.0 ? -1.0 : 0.0);
            const double dl = (2.0 * residual + cfg_.lambda * w * sign) * inv_b;
            const double dl_vec[1] = {dl};
            nets_[net_of_[s]].backward(caches[s], dl_vec, grads[net_of_[s]]);
        }
    }
    loss *= inv_b;
    if (!std::isfinite(loss))
        throw TrainingError("RewardDecomposer: non-finite loss");
    std::vector<const MlpGrads *> ptrs;
    ptrs.reserve(grads.size());
    for (const auto &g : grads)
        ptrs.push_back(&g);
    opt_.step(ptrs);

    if (!trained_enough_ && static_cast<int>(residual_window_.size()) >= cfg_.window &&
        rolling_residual_mean() < delta_)
        trained_enough_ = true;
    return loss;
}

double RewardDecomposer::rolling_residual_mean() const {
    if (residual_window_.empty())
        return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double v : residual_window_)
        s += v;
    return s / static_cast<double>(residual_window_.size());
}

std::optional<std::vector<double>>
RewardDecomposer::infer_local(const Obs &obs, const std::vector<int> &action,
                              double r_global) const {
    std::vector<double> shares(obs_dims_.size(), 0.0);
    double pred = 0.0;
    for (size_t s = 0; s < subsets_.size(); ++s) {
        const double v = subset_value(s, obs, action);
        pred += v;
        const double share = v / static_cast<double>(subsets_[s].size());
        for (int agent : subsets_[s])
            shares[agent] += share;
    }
    if (std::fabs(pred - r_global) >= delta_)
        return std::nullopt;
    return shares;
}

} // namespace lomaq
