#include "multi_cart_pole.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rng.hpp"

namespace lomaq {

std::pair<double, double> cart_pole_accel(const CartState &s, double force,
                                          const CartPoleParams &p) {
    const double total_mass = p.cart_mass + p.pole_mass;
    const double polemass_length = p.pole_mass * p.pole_half_length;
    const double cos_t = std::cos(s.theta);
    const double sin_t = std::sin(s.theta);
    const double temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) /
        (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;
    return {x_acc, theta_acc};
}

CoupledMultiCartPole::CoupledMultiCartPole(const CartPoleParams &p)
    : params_(p), graph_(AgentGraph::line(p.n)) {
    if (p.n < 1)
        throw std::invalid_argument("CoupledMultiCartPole: need at least one cart");
    carts_.resize(static_cast<size_t>(p.n));
    alive_.assign(static_cast<size_t>(p.n), true);
}

Obs CoupledMultiCartPole::reset(uint64_t seed) {
    rng_ = make_rng(seed, 201);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (int i = 0; i < params_.n; ++i) {
        carts_[i].x = params_.rest_spacing * i + jitter(rng_);
        carts_[i].x_dot = jitter(rng_);
        carts_[i].theta = jitter(rng_);
        carts_[i].theta_dot = jitter(rng_);
        alive_[i] = true;
    }
    t_ = 0;
    episode_over_ = false;
    return observe();
}

double CoupledMultiCartPole::spring_force(int i) const {
    // F_i = k * [(x_{i+1} - x_i - L0) - (x_i - x_{i-1} - L0)], boundary terms absent
    double f = 0.0;
    if (i + 1 < params_.n)
        f += params_.spring_k * (carts_[i + 1].x - carts_[i].x - params_.rest_spacing);
    if (i - 1 >= 0)
        f -= params_.spring_k * (carts_[i].x - carts_[i - 1].x - params_.rest_spacing);
    return f;
}

EnvStep CoupledMultiCartPole::step(const std::vector<int> &action) {
    if (episode_over_)
        throw std::logic_error("CoupledMultiCartPole: step after episode end");
    if (static_cast<int>(action.size()) != params_.n)
        throw std::invalid_argument("CoupledMultiCartPole: one action per cart required");
    const double fail_angle = params_.fail_angle_deg * std::numbers::pi / 180.0;

    std::vector<std::pair<double, double>> acc(static_cast<size_t>(params_.n));
    for (int i = 0; i < params_.n; ++i) {
        if (action[i] != 0 && action[i] != 1)
            throw std::invalid_argument("CoupledMultiCartPole: action must be 0 or 1");
        const double applied = (action[i] == 1 ? params_.force_mag : -params_.force_mag);
        acc[i] = cart_pole_accel(carts_[i], applied + spring_force(i), params_);
    }
    // semi-implicit Euler: velocities first, then positions with new velocities
    for (int i = 0; i < params_.n; ++i) {
        carts_[i].x_dot += params_.dt * acc[i].first;
        carts_[i].x += params_.dt * carts_[i].x_dot;
        carts_[i].theta_dot += params_.dt * acc[i].second;
        carts_[i].theta += params_.dt * carts_[i].theta_dot;
    }
    ++t_;

    EnvStep out;
    std::vector<double> local(static_cast<size_t>(params_.n), 0.0);
    int alive_count = 0;
    for (int i = 0; i < params_.n; ++i) {
        if (alive_[i] && std::fabs(carts_[i].theta) > fail_angle)
            alive_[i] = false; // latched: a fallen pole never scores again
        if (alive_[i]) {
            local[i] = 1.0;
            ++alive_count;
        }
    }
    out.r_global = static_cast<double>(alive_count);
    if (local_rewards_)
        out.r_local = std::move(local);
    out.done = (alive_count == 0);
    out.truncated = !out.done && t_ >= params_.horizon;
    episode_over_ = out.done || out.truncated;
    out.next_obs = observe();
    return out;
}

Obs CoupledMultiCartPole::observe() const {
    Obs obs(static_cast<size_t>(params_.n));
    for (int i = 0; i < params_.n; ++i) {
        const CartState &c = carts_[i];
        std::vector<double> v;
        v.reserve(11);
        v.push_back(alive_[i] ? 1.0 : 0.0);
        v.push_back(c.x - params_.rest_spacing * i); // offset from rest position
        v.push_back(c.x_dot);
        v.push_back(c.theta);
        v.push_back(c.theta_dot);
        if (i - 1 >= 0) {
            v.push_back(1.0);
            v.push_back(carts_[i - 1].x - c.x);
            v.push_back(carts_[i - 1].x_dot);
        } else {
            v.insert(v.end(), {0.0, 0.0, 0.0});
        }
        if (i + 1 < params_.n) {
            v.push_back(1.0);
            v.push_back(carts_[i + 1].x - c.x);
            v.push_back(carts_[i + 1].x_dot);
        } else {
            v.insert(v.end(), {0.0, 0.0, 0.0});
        }
        obs[i] = std::move(v);
    }
    return obs;
}

} // namespace lomaq
