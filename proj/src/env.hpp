#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "graph.hpp"

namespace lomaq {

using Obs = std::vector<std::vector<double>>; // one vector per agent

/// Result of one environment step. `done` marks a terminal state (bootstrap
/// term dropped); `truncated` marks a horizon cutoff (episode resets but the
/// state is not terminal). When local rewards are exposed they sum to r_global.
struct EnvStep {
    Obs next_obs;
    double r_global = 0.0;
    std::optional<std::vector<double>> r_local;
    bool done = false;
    bool truncated = false;
};

class Env {
public:
    virtual ~Env() = default;

    virtual std::string name() const = 0;
    virtual int num_agents() const = 0;
    virtual int obs_dim(int agent) const = 0;
    virtual int num_actions(int agent) const = 0;
    virtual const AgentGraph &graph() const = 0;
    virtual long default_horizon() const = 0;

    virtual Obs reset(uint64_t seed) = 0;
    virtual EnvStep step(const std::vector<int> &action) = 0;

    // When false, step() leaves r_local unset (global-only reward channel).
    bool local_rewards_enabled() const { return local_rewards_; }
    void set_local_rewards(bool on) { local_rewards_ = on; }

protected:
    bool local_rewards_ = true;
};

} // namespace lomaq
