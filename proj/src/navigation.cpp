#include "navigation.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace lomaq {

namespace {

AgentGraph overlap_graph(const std::vector<Vec2> &homes, double radius) {
    const int n = static_cast<int>(homes.size());
    AgentGraph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (distance(homes[i], homes[j]) < 2.0 * radius)
                g.add_edge(i, j);
    return g;
}

} // namespace

BoundedCooperativeNavigation::BoundedCooperativeNavigation(const NavigationParams &p)
    : params_(p), num_landmarks_(p.num_landmarks < 0 ? p.n : p.num_landmarks), graph_(1) {
    if (p.n < 1)
        throw std::invalid_argument("BoundedCooperativeNavigation: need at least one agent");
    if (!p.homes.empty() && static_cast<int>(p.homes.size()) != p.n)
        throw std::invalid_argument("BoundedCooperativeNavigation: one home per agent required");
    if (!p.fixed_landmarks.empty() &&
        static_cast<int>(p.fixed_landmarks.size()) != num_landmarks_)
        throw std::invalid_argument("BoundedCooperativeNavigation: fixed landmark count mismatch");
    homes_ = p.homes;
    if (homes_.empty()) {
        auto gen = make_rng(p.seed, 300);
        std::uniform_real_distribution<double> coord(0.0, p.arena);
        homes_.resize(static_cast<size_t>(p.n));
        for (auto &h : homes_)
            h = {coord(gen), coord(gen)};
    }
    graph_ = overlap_graph(homes_, p.region_radius);
    positions_ = homes_;
    landmarks_.assign(static_cast<size_t>(num_landmarks_), Vec2{});
}

Obs BoundedCooperativeNavigation::reset(uint64_t seed) {
    positions_ = homes_;
    if (!params_.fixed_landmarks.empty()) {
        landmarks_ = params_.fixed_landmarks;
    } else {
        auto gen = make_rng(seed, 301);
        std::uniform_real_distribution<double> coord(0.0, params_.arena);
        for (auto &lm : landmarks_)
            lm = {coord(gen), coord(gen)};
    }
    t_ = 0;
    episode_over_ = false;
    return observe();
}

Vec2 BoundedCooperativeNavigation::clip_to_region(int agent, Vec2 pos) const {
    const Vec2 &home = homes_[agent];
    const double d = distance(pos, home);
    if (d <= params_.region_radius || d == 0.0)
        return pos;
    const double s = params_.region_radius / d;
    return {home.x + (pos.x - home.x) * s, home.y + (pos.y - home.y) * s};
}

EnvStep BoundedCooperativeNavigation::step(const std::vector<int> &action) {
    if (episode_over_)
        throw std::logic_error("BoundedCooperativeNavigation: step after episode end");
    if (static_cast<int>(action.size()) != params_.n)
        throw std::invalid_argument("BoundedCooperativeNavigation: one action per agent required");
    for (int i = 0; i < params_.n; ++i) {
        Vec2 pos = positions_[i];
        switch (action[i]) {
        case 0: break;
        case 1: pos.x += params_.step_size; break;
        case 2: pos.x -= params_.step_size; break;
        case 3: pos.y += params_.step_size; break;
        case 4: pos.y -= params_.step_size; break;
        default:
            throw std::invalid_argument("BoundedCooperativeNavigation: action out of range");
        }
        positions_[i] = clip_to_region(i, pos);
    }
    ++t_;

    EnvStep out;
    auto [global, local] = score();
    out.r_global = global;
    if (local_rewards_)
        out.r_local = std::move(local);
    out.truncated = t_ >= params_.horizon;
    episode_over_ = out.truncated;
    out.next_obs = observe();
    return out;
}

std::pair<double, std::vector<double>> BoundedCooperativeNavigation::score() const {
    double global = 0.0;
    std::vector<double> local(static_cast<size_t>(params_.n), 0.0);
    for (const auto &lm : landmarks_) {
        int nearest = -1;
        double nearest_dist = 0.0;
        for (int i = 0; i < params_.n; ++i) {
            const double d = distance(positions_[i], lm);
            if (d <= params_.cover_radius && (nearest < 0 || d < nearest_dist)) {
                nearest = i;
                nearest_dist = d;
            }
        }
        if (nearest >= 0) {
            global += 1.0; // each landmark counts once per step
            local[nearest] += 1.0;
        }
    }
    return {global, local};
}

void BoundedCooperativeNavigation::teleport(const std::vector<Vec2> &positions) {
    if (static_cast<int>(positions.size()) != params_.n)
        throw std::invalid_argument("teleport: one position per agent required");
    for (int i = 0; i < params_.n; ++i)
        positions_[i] = clip_to_region(i, positions[i]);
    episode_over_ = false;
}

Obs BoundedCooperativeNavigation::observe() const {
    Obs obs(static_cast<size_t>(params_.n));
    for (int i = 0; i < params_.n; ++i) {
        std::vector<double> v;
        v.reserve(static_cast<size_t>(obs_dim(i)));
        v.push_back(positions_[i].x);
        v.push_back(positions_[i].y);
        v.push_back(homes_[i].x - positions_[i].x);
        v.push_back(homes_[i].y - positions_[i].y);
        int colocated = 0;
        for (int j = 0; j < params_.n; ++j)
            if (j != i && distance(positions_[i], positions_[j]) <= params_.cover_radius)
                ++colocated;
        v.push_back(static_cast<double>(colocated));
        for (const auto &lm : landmarks_) {
            if (distance(lm, homes_[i]) <= params_.region_radius) {
                v.push_back(1.0);
                v.push_back(lm.x - positions_[i].x);
                v.push_back(lm.y - positions_[i].y);
            } else {
                v.insert(v.end(), {0.0, 0.0, 0.0});
            }
        }
        obs[i] = std::move(v);
    }
    return obs;
}

NavigationParams nav2_params() {
    NavigationParams p;
    p.n = 2;
    p.num_landmarks = 1;
    p.homes = {{0.3, 0.5}, {0.7, 0.5}};
    p.fixed_landmarks = {{0.5, 0.5}};
    return p;
}

} // namespace lomaq
