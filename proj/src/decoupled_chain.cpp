#include "decoupled_chain.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace lomaq {

TabularMdp random_tabular_mdp(int states, int actions, std::mt19937_64 &rng) {
    if (states < 1 || states > 5 || actions < 1 || actions > 5)
        throw std::invalid_argument("random_tabular_mdp: states and actions must be in [1, 5]");
    TabularMdp mdp;
    mdp.num_states = states;
    mdp.num_actions = actions;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    mdp.reward.assign(states, std::vector<double>(actions));
    mdp.transition.assign(states,
                          std::vector<std::vector<double>>(actions, std::vector<double>(states)));
    for (int s = 0; s < states; ++s) {
        for (int a = 0; a < actions; ++a) {
            mdp.reward[s][a] = unit(rng);
            double total = 0.0;
            for (int s2 = 0; s2 < states; ++s2) {
                const double w = 0.05 + unit(rng); // bounded away from 0 so chains mix
                mdp.transition[s][a][s2] = w;
                total += w;
            }
            for (int s2 = 0; s2 < states; ++s2)
                mdp.transition[s][a][s2] /= total;
        }
    }
    return mdp;
}

std::vector<std::vector<double>> value_iteration(const TabularMdp &mdp, double gamma) {
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("value_iteration: gamma must lie in [0, 1)");
    std::vector<std::vector<double>> q(mdp.num_states, std::vector<double>(mdp.num_actions, 0.0));
    std::vector<double> v(static_cast<size_t>(mdp.num_states), 0.0);
    for (long iter = 0; iter < 1000000; ++iter) {
        double delta = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double next = 0.0;
                for (int s2 = 0; s2 < mdp.num_states; ++s2)
                    next += mdp.transition[s][a][s2] * v[s2];
                const double updated = mdp.reward[s][a] + gamma * next;
                delta = std::max(delta, std::fabs(updated - q[s][a]));
                q[s][a] = updated;
            }
        }
        for (int s = 0; s < mdp.num_states; ++s) {
            double best = q[s][0];
            for (int a = 1; a < mdp.num_actions; ++a)
                best = std::max(best, q[s][a]);
            v[s] = best;
        }
        if (delta < 1e-12)
            break;
    }
    return q;
}

DecoupledChain::DecoupledChain(const DecoupledChainParams &p) : horizon_(p.horizon), graph_(p.n) {
    if (p.n < 1)
        throw std::invalid_argument("DecoupledChain: need at least one copy");
    auto gen = make_rng(p.seed, 400);
    copies_.reserve(static_cast<size_t>(p.n));
    for (int i = 0; i < p.n; ++i)
        copies_.push_back(random_tabular_mdp(p.states, p.actions, gen));
    states_.assign(static_cast<size_t>(p.n), 0);
}

DecoupledChain::DecoupledChain(std::vector<TabularMdp> copies, long horizon)
    : copies_(std::move(copies)), horizon_(horizon) {
    if (copies_.empty())
        throw std::invalid_argument("DecoupledChain: need at least one copy");
    graph_ = AgentGraph(static_cast<int>(copies_.size()));
    states_.assign(copies_.size(), 0);
}

Obs DecoupledChain::reset(uint64_t seed) {
    rng_ = make_rng(seed, 401);
    for (size_t i = 0; i < copies_.size(); ++i) {
        std::uniform_int_distribution<int> start(0, copies_[i].num_states - 1);
        states_[i] = start(rng_);
    }
    t_ = 0;
    episode_over_ = false;
    return observe();
}

void DecoupledChain::set_states(const std::vector<int> &states) {
    if (states.size() != copies_.size())
        throw std::invalid_argument("DecoupledChain::set_states: one state per copy required");
    states_ = states;
    episode_over_ = false;
}

EnvStep DecoupledChain::step(const std::vector<int> &action) {
    if (episode_over_)
        throw std::logic_error("DecoupledChain: step after episode end");
    if (action.size() != copies_.size())
        throw std::invalid_argument("DecoupledChain: one action per copy required");
    EnvStep out;
    std::vector<double> local(copies_.size(), 0.0);
    for (size_t i = 0; i < copies_.size(); ++i) {
        const TabularMdp &mdp = copies_[i];
        if (action[i] < 0 || action[i] >= mdp.num_actions)
            throw std::invalid_argument("DecoupledChain: action out of range");
        local[i] = mdp.reward[states_[i]][action[i]];
        const auto &probs = mdp.transition[states_[i]][action[i]];
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double u = unit(rng_);
        int next = mdp.num_states - 1;
        for (int s2 = 0; s2 < mdp.num_states; ++s2) {
            u -= probs[s2];
            if (u <= 0.0) {
                next = s2;
                break;
            }
        }
        states_[i] = next;
        out.r_global += local[i];
    }
    ++t_;
    if (local_rewards_)
        out.r_local = std::move(local);
    out.truncated = t_ >= horizon_;
    episode_over_ = out.truncated;
    out.next_obs = observe();
    return out;
}

std::vector<std::vector<std::vector<double>>>
DecoupledChain::value_iteration_oracle(double gamma) const {
    std::vector<std::vector<std::vector<double>>> out;
    out.reserve(copies_.size());
    for (const auto &mdp : copies_)
        out.push_back(value_iteration(mdp, gamma));
    return out;
}

Obs DecoupledChain::observe() const {
    Obs obs(copies_.size());
    for (size_t i = 0; i < copies_.size(); ++i) {
        std::vector<double> v(static_cast<size_t>(copies_[i].num_states), 0.0);
        v[states_[i]] = 1.0;
        obs[i] = std::move(v);
    }
    return obs;
}

} // namespace lomaq
