#include "bandit.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"
#include "rng.hpp"

namespace lomaq {

double beta_j(long t, double delta, int block_size, int num_blocks, int actions_per_agent, int dim,
              double lambda, double s_x, double s_theta, double r_max) {
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("beta_j: delta must lie in (0,1)");
    if (lambda <= 0.0)
        throw std::invalid_argument("beta_j: lambda must be positive");
    if (t < 0)
        throw std::invalid_argument("beta_j: t must be >= 0");
    const double log_arg = static_cast<double>(num_blocks) *
                           std::pow(static_cast<double>(actions_per_agent), block_size) *
                           (1.0 + static_cast<double>(t) * s_x) / lambda / delta;
    const double log_term = std::max(0.0, std::log(log_arg));
    const double root = std::sqrt(lambda) * block_size * s_theta +
                        r_max * std::sqrt(static_cast<double>(dim) * log_term);
    return root * root;
}

namespace {

std::vector<double> sphere_point(int dim, double radius, std::mt19937_64 &rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(static_cast<size_t>(dim));
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double &v : x) {
            v = gauss(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (double &v : x)
        v *= radius / norm;
    return x;
}

} // namespace

LinearBanditEnv::LinearBanditEnv(const Params &p)
    : n_(p.n), k_(p.actions), d_(p.dim), sigma_(p.sigma), s_x_(p.s_x), rng_(make_rng(p.seed, 101)) {
    if (n_ < 1 || k_ < 1 || d_ < 1)
        throw std::invalid_argument("LinearBanditEnv: n, K, d must be >= 1");
    auto gen = make_rng(p.seed, 100);
    std::normal_distribution<double> gauss(0.0, 1.0);
    theta_.assign(n_, std::vector<std::vector<double>>(k_, std::vector<double>(d_)));
    double worst_sum = 0.0;
    for (int i = 0; i < n_; ++i) {
        double worst = 0.0;
        for (int j = 0; j < k_; ++j) {
            double norm = 0.0;
            for (double &v : theta_[i][j]) {
                v = gauss(gen);
                norm += v * v;
            }
            worst = std::max(worst, std::sqrt(norm));
        }
        worst_sum += worst;
    }
    // scale so sum_i max_j |theta_ij| * s_x = 1: every subset's expected reward
    // lands in [-1, 1] regardless of partition choice
    const double scale = 1.0 / (worst_sum * s_x_);
    s_theta_ = 0.0;
    for (auto &per_agent : theta_)
        for (auto &vec : per_agent) {
            double norm = 0.0;
            for (double &v : vec) {
                v *= scale;
                norm += v * v;
            }
            s_theta_ = std::max(s_theta_, std::sqrt(norm));
        }
}

LinearBanditEnv::LinearBanditEnv(std::vector<std::vector<std::vector<double>>> theta_star,
                                 double sigma, double s_x, uint64_t seed)
    : n_(static_cast<int>(theta_star.size())), sigma_(sigma), s_x_(s_x),
      theta_(std::move(theta_star)), rng_(make_rng(seed, 101)) {
    if (theta_.empty() || theta_[0].empty() || theta_[0][0].empty())
        throw std::invalid_argument("LinearBanditEnv: empty parameter table");
    k_ = static_cast<int>(theta_[0].size());
    d_ = static_cast<int>(theta_[0][0].size());
    s_theta_ = 0.0;
    for (const auto &per_agent : theta_)
        for (const auto &vec : per_agent)
            s_theta_ = std::max(s_theta_, std::sqrt(dot(vec, vec)));
}

std::span<const double> LinearBanditEnv::theta(int agent, int action) const {
    return theta_.at(agent).at(action);
}

std::vector<double> LinearBanditEnv::next_context() { return sphere_point(d_, s_x_, rng_); }

std::vector<double> LinearBanditEnv::block_rewards(std::span<const double> x,
                                                   const std::vector<int> &action,
                                                   const Partition &p) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> out;
    out.reserve(p.blocks().size());
    for (const auto &block : p.blocks()) {
        double mean = 0.0;
        for (int i : block)
            mean += dot(x, theta_[i][action[i]]);
        out.push_back(mean + sigma_ * noise(rng_));
    }
    return out;
}

double LinearBanditEnv::expected_agent_reward(std::span<const double> x, int agent,
                                              int action) const {
    return dot(x, theta_.at(agent).at(action));
}

std::vector<int> LinearBanditEnv::best_action(std::span<const double> x) const {
    std::vector<int> best(static_cast<size_t>(n_), 0);
    for (int i = 0; i < n_; ++i) {
        double best_val = dot(x, theta_[i][0]);
        for (int j = 1; j < k_; ++j) {
            const double v = dot(x, theta_[i][j]);
            if (v > best_val) {
                best_val = v;
                best[i] = j;
            }
        }
    }
    return best;
}

double LinearBanditEnv::instantaneous_regret(std::span<const double> x,
                                             const std::vector<int> &action) const {
    const auto star = best_action(x);
    double gap = 0.0;
    for (int i = 0; i < n_; ++i)
        gap += dot(x, theta_[i][star[i]]) - dot(x, theta_[i][action[i]]);
    return gap;
}

MultiOful::MultiOful(const Partition &partition, int actions_per_agent, int dim, const Config &cfg,
                     double s_x, double s_theta, double r_max)
    : partition_(partition), k_(actions_per_agent), d_(dim), cfg_(cfg), s_x_(s_x),
      s_theta_(s_theta), r_max_(r_max) {
    arms_.resize(partition_.blocks().size());
    for (size_t b = 0; b < arms_.size(); ++b) {
        const auto &block = partition_.blocks()[b];
        double count = std::pow(static_cast<double>(k_), static_cast<double>(block.size()));
        if (count > 1e7)
            throw ConfigError("MultiOful: block " + std::to_string(b) + " enumerates " +
                              std::to_string(count) + " sub-arms");
        arms_[b].resize(static_cast<size_t>(count));
        for (auto &arm : arms_[b]) {
            arm.gram = Dense2D::identity(d_, cfg_.lambda);
            arm.gram_inv = Dense2D::identity(d_, 1.0 / cfg_.lambda);
            arm.response.assign(static_cast<size_t>(d_), 0.0);
        }
    }
}

long MultiOful::total_sub_arms() const {
    long total = 0;
    for (const auto &block_arms : arms_)
        total += static_cast<long>(block_arms.size());
    return total;
}

int MultiOful::sub_arm_index(int block, const std::vector<int> &action) const {
    const auto &members = partition_.blocks()[block];
    int idx = 0;
    for (int agent : members)
        idx = idx * k_ + action[agent];
    return idx;
}

double MultiOful::beta_at(int block, long t) const {
    return beta_j(t, cfg_.delta, static_cast<int>(partition_.blocks()[block].size()),
                  partition_.num_blocks(), k_, d_, cfg_.lambda, s_x_, s_theta_, r_max_);
}

double MultiOful::beta(int block) const { return beta_at(block, t_); }

std::vector<int> MultiOful::select_action(std::span<const double> x) {
    std::vector<int> action(static_cast<size_t>(partition_.num_agents()), 0);
    std::vector<double> theta_est;
    for (size_t b = 0; b < arms_.size(); ++b) {
        const auto &members = partition_.blocks()[b];
        // round index is one past the number of stored samples
        const double sqrt_beta = std::sqrt(beta_at(static_cast<int>(b), t_ + 1));
        int best = 0;
        double best_score = 0.0;
        for (size_t a = 0; a < arms_[b].size(); ++a) {
            const Arm &arm = arms_[b][a];
            matvec(arm.gram_inv, arm.response, theta_est);
            const double mean = dot(x, theta_est);
            const double width = std::sqrt(std::max(0.0, quad_form(arm.gram_inv, x)));
            const double score = mean + cfg_.alpha * sqrt_beta * width;
            if (a == 0 || score > best_score) {
                best_score = score;
                best = static_cast<int>(a);
            }
        }
        // decode lexicographic sub-arm index back into per-agent actions
        int rem = best;
        for (size_t m = members.size(); m-- > 0;) {
            action[members[m]] = rem % k_;
            rem /= k_;
        }
    }
    return action;
}

void MultiOful::update(std::span<const double> x, const std::vector<int> &action,
                       std::span<const double> block_rewards) {
    if (block_rewards.size() != arms_.size())
        throw std::invalid_argument("MultiOful::update: one reward per block required");
    ++t_;
    std::vector<double> vx;
    for (size_t b = 0; b < arms_.size(); ++b) {
        Arm &arm = arms_[b][sub_arm_index(static_cast<int>(b), action)];
        add_outer(arm.gram, x, x);
        for (int i = 0; i < d_; ++i)
            arm.response[i] += x[i] * block_rewards[b];
        ++arm.updates;
        if (arm.updates % 1000 == 0) {
            arm.gram_inv = spd_inverse(arm.gram); // periodic refactor against drift
        } else {
            matvec(arm.gram_inv, x, vx);
            const double denom = 1.0 + dot(x, vx);
            add_outer(arm.gram_inv, vx, vx, -1.0 / denom);
        }
    }
}

std::vector<double> MultiOful::theta_hat(int block, int sub_arm) const {
    const Arm &arm = arms_.at(block).at(sub_arm);
    std::vector<double> est;
    matvec(arm.gram_inv, arm.response, est);
    return est;
}

const Dense2D &MultiOful::gram(int block, int sub_arm) const {
    return arms_.at(block).at(sub_arm).gram;
}

bool MultiOful::contains_truth(const LinearBanditEnv &env) const {
    std::vector<double> theta_true(static_cast<size_t>(d_));
    std::vector<double> est, diff(static_cast<size_t>(d_));
    for (size_t b = 0; b < arms_.size(); ++b) {
        const auto &members = partition_.blocks()[b];
        const double bound = std::sqrt(beta(static_cast<int>(b)));
        std::vector<int> sub(members.size(), 0);
        for (size_t a = 0; a < arms_[b].size(); ++a) {
            // decode sub-arm index into member actions
            int rem = static_cast<int>(a);
            for (size_t m = members.size(); m-- > 0;) {
                sub[m] = rem % k_;
                rem /= k_;
            }
            std::fill(theta_true.begin(), theta_true.end(), 0.0);
            for (size_t m = 0; m < members.size(); ++m) {
                auto th = env.theta(members[m], sub[m]);
                for (int i = 0; i < d_; ++i)
                    theta_true[i] += th[i];
            }
            const Arm &arm = arms_[b][a];
            matvec(arm.gram_inv, arm.response, est);
            for (int i = 0; i < d_; ++i)
                diff[i] = theta_true[i] - est[i];
            if (std::sqrt(std::max(0.0, quad_form(arm.gram, diff))) > bound)
                return false;
        }
    }
    return true;
}

BanditRunResult run_bandit_experiment(const LinearBanditEnv::Params &env_params,
                                      const Partition &partition, const MultiOful::Config &cfg,
                                      long horizon, uint64_t seed,
                                      const BanditRunOptions &opts) {
    if (horizon < 1)
        throw std::invalid_argument("run_bandit_experiment: horizon must be >= 1");
    if (partition.num_agents() != env_params.n)
        throw std::invalid_argument("run_bandit_experiment: partition does not match agent count");
    size_t max_block = 0;
    for (const auto &block : partition.blocks())
        max_block = std::max(max_block, block.size());
    const double work = static_cast<double>(horizon) *
                        std::pow(static_cast<double>(env_params.actions),
                                 static_cast<double>(max_block));
    if (work > cfg.enumeration_budget)
        throw ConfigError("run_bandit_experiment: T*K^max|J| = " + std::to_string(work) +
                          " exceeds enumeration budget");

    LinearBanditEnv::Params p = env_params;
    p.seed = seed;
    LinearBanditEnv env(p);
    MultiOful algo(partition, p.actions, p.dim, cfg, env.s_x(), env.s_theta(), env.sigma());

    BanditRunResult result;
    result.cumulative_regret.reserve(static_cast<size_t>(horizon));
    double total = 0.0;
    for (long t = 1; t <= horizon; ++t) {
        const auto x = env.next_context();
        if (opts.check_coverage && result.coverage_ok && !algo.contains_truth(env))
            result.coverage_ok = false;
        const auto action = algo.select_action(x);
        const auto rewards = env.block_rewards(x, action, partition);
        total += env.instantaneous_regret(x, action);
        algo.update(x, action, rewards);
        result.cumulative_regret.push_back(total);
    }
    if (opts.check_coverage && result.coverage_ok && !algo.contains_truth(env))
        result.coverage_ok = false;
    return result;
}

} // namespace lomaq
