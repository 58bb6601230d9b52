#pragma once

#include <random>

#include "env.hpp"

namespace lomaq {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Vec2 &a, const Vec2 &b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

struct NavigationParams {
    int n = 2;
    int num_landmarks = -1; // -1 -> n
    double arena = 1.0;
    double region_radius = 0.35;
    double cover_radius = 0.1;
    double step_size = 0.1;
    long horizon = 50;
    uint64_t seed = 0;                 // draws homes when none are given
    std::vector<Vec2> homes;           // optional explicit placement
    std::vector<Vec2> fixed_landmarks; // optional; otherwise sampled per reset
};

/// Bounded cooperative navigation: each agent moves on a 5-way discrete grid
/// but may never leave the disk around its home. A landmark scores +1 per step
/// when covered by at least one agent; the point goes to the nearest covering
/// agent (ties to the lowest index). The interaction graph links agents whose
/// regions overlap; homes are fixed for the lifetime of the instance so the
/// graph is static.
class BoundedCooperativeNavigation final : public Env {
public:
    explicit BoundedCooperativeNavigation(const NavigationParams &p);

    std::string name() const override { return "bounded_navigation"; }
    int num_agents() const override { return params_.n; }
    int obs_dim(int) const override { return 5 + 3 * num_landmarks_; }
    int num_actions(int) const override { return 5; } // stay, +x, -x, +y, -y
    const AgentGraph &graph() const override { return graph_; }
    long default_horizon() const override { return params_.horizon; }

    Obs reset(uint64_t seed) override;
    EnvStep step(const std::vector<int> &action) override;

    const NavigationParams &params() const { return params_; }
    const std::vector<Vec2> &homes() const { return homes_; }
    const std::vector<Vec2> &positions() const { return positions_; }
    const std::vector<Vec2> &landmarks() const { return landmarks_; }

    // Direct state placement for data generation and probing. Positions are
    // clipped into each agent's region.
    void teleport(const std::vector<Vec2> &positions);
    Obs observe() const;

    // Reward of the current placement: (r_global, r_local).
    std::pair<double, std::vector<double>> score() const;

private:
    Vec2 clip_to_region(int agent, Vec2 pos) const;

    NavigationParams params_;
    int num_landmarks_;
    std::vector<Vec2> homes_;
    std::vector<Vec2> positions_;
    std::vector<Vec2> landmarks_;
    AgentGraph graph_;
    long t_ = 0;
    bool episode_over_ = true;
};

// Two agents, one landmark pinned at the arena center, symmetric homes.
NavigationParams nav2_params();

} // namespace lomaq
