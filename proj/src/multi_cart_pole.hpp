#pragma once

#include <random>

#include "env.hpp"

namespace lomaq {

struct CartPoleParams {
    int n = 2;
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double pole_half_length = 0.5;
    double gravity = 9.8;
    double force_mag = 10.0;
    double dt = 0.02;
    double fail_angle_deg = 12.0;
    double spring_k = 0.5;
    double rest_spacing = 2.0;
    long horizon = 500;
};

struct CartState {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;
};

// Accelerations of a single cart-pole under total horizontal force `force`.
// Returns {x_ddot, theta_ddot}.
std::pair<double, double> cart_pole_accel(const CartState &s, double force,
                                          const CartPoleParams &p);

/// n cart-poles on a line, neighbors coupled by linear springs between carts.
/// Local reward +1 per step per pole that has never fallen; a fallen pole is
/// latched failed and contributes 0 afterwards. Episode terminates when every
/// pole has fallen, truncates at the horizon.
class CoupledMultiCartPole final : public Env {
public:
    explicit CoupledMultiCartPole(const CartPoleParams &p);

    std::string name() const override { return "multi_cart_pole"; }
    int num_agents() const override { return params_.n; }
    int obs_dim(int) const override { return 11; }
    int num_actions(int) const override { return 2; }
    const AgentGraph &graph() const override { return graph_; }
    long default_horizon() const override { return params_.horizon; }

    Obs reset(uint64_t seed) override;
    EnvStep step(const std::vector<int> &action) override;

    const CartPoleParams &params() const { return params_; }
    const std::vector<CartState> &carts() const { return carts_; }
    bool alive(int i) const { return alive_[i]; }

private:
    Obs observe() const;
    double spring_force(int i) const;

    CartPoleParams params_;
    AgentGraph graph_;
    std::vector<CartState> carts_;
    std::vector<bool> alive_;
    long t_ = 0;
    bool episode_over_ = true;
    std::mt19937_64 rng_;
};

} // namespace lomaq
