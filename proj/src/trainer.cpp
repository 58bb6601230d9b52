#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"
#include "rng.hpp"

namespace lomaq {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1)
        throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    store_.reserve(std::min<size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (store_.size() < capacity_) {
        store_.push_back(std::move(t));
    } else {
        store_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition &ReplayBuffer::sample(std::mt19937_64 &rng) const {
    if (store_.empty())
        throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
    std::uniform_int_distribution<size_t> pick(0, store_.size() - 1);
    return store_[pick(rng)];
}

std::vector<double> UtilityNets::input_for(int agent, std::span<const double> obs) const {
    if (!shared)
        return {obs.begin(), obs.end()};
    std::vector<double> x;
    x.reserve(obs.size() + static_cast<size_t>(n));
    x.insert(x.end(), obs.begin(), obs.end());
    for (int k = 0; k < n; ++k)
        x.push_back(k == agent ? 1.0 : 0.0);
    return x;
}

std::vector<double> UtilityNets::values(int agent, std::span<const double> obs) const {
    return net_for(agent).forward(input_for(agent, obs));
}

std::vector<double> UtilityNets::values(int agent, std::span<const double> obs,
                                        ForwardCache &cache) const {
    return net_for(agent).forward(input_for(agent, obs), cache);
}

std::vector<int> greedy_joint_action(const UtilityNets &nets, const Obs &obs) {
    if (static_cast<int>(obs.size()) != nets.n)
        throw std::invalid_argument("greedy_joint_action: one observation per agent required");
    std::vector<int> action(obs.size(), 0);
    for (int i = 0; i < nets.n; ++i) {
        const auto values = nets.values(i, obs[i]);
        int best = 0;
        for (size_t a = 1; a < values.size(); ++a)
            if (values[a] > values[best])
                best = static_cast<int>(a);
        action[i] = best;
    }
    return action;
}

std::vector<int> epsilon_greedy(const std::vector<int> &greedy, double eps,
                                const std::vector<int> &action_counts, std::mt19937_64 &rng,
                                bool per_agent) {
    if (eps < 0.0 || eps > 1.0)
        throw std::invalid_argument("epsilon_greedy: eps must lie in [0, 1]");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_action = [&](int i) {
        std::uniform_int_distribution<int> pick(0, action_counts[i] - 1);
        return pick(rng);
    };
    std::vector<int> action = greedy;
    if (per_agent) {
        for (size_t i = 0; i < action.size(); ++i)
            if (unit(rng) < eps)
                action[i] = random_action(static_cast<int>(i));
        return action;
    }
    if (unit(rng) < eps)
        for (size_t i = 0; i < action.size(); ++i)
            action[i] = random_action(static_cast<int>(i));
    return action;
}

EvalStats evaluate_policy(Env &env, const std::function<std::vector<int>(const Obs &)> &policy,
                          int episodes, uint64_t seed_base) {
    if (episodes < 1)
        throw std::invalid_argument("evaluate_policy: need at least one episode");
    EvalStats stats;
    stats.min = std::numeric_limits<double>::infinity();
    stats.max = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        Obs obs = env.reset(mix_seed(seed_base + static_cast<uint64_t>(ep)));
        double ret = 0.0;
        while (true) {
            const auto step = env.step(policy(obs));
            ret += step.r_global;
            obs = step.next_obs;
            if (step.done || step.truncated)
                break;
        }
        total += ret;
        stats.min = std::min(stats.min, ret);
        stats.max = std::max(stats.max, ret);
    }
    stats.mean = total / episodes;
    return stats;
}

namespace {

size_t resolve_replay_capacity(const TrainerConfig &cfg, long horizon) {
    if (cfg.replay_capacity > 0)
        return static_cast<size_t>(cfg.replay_capacity);
    const long by_episodes = 5000 * std::max<long>(horizon, 1);
    return static_cast<size_t>(std::min<long>(by_episodes, 250000));
}

} // namespace

Trainer::Trainer(EnvFactory factory, TrainerConfig cfg)
    : factory_(std::move(factory)), cfg_(std::move(cfg)), env_(factory_()), eval_env_(factory_()),
      n_(env_->num_agents()),
      partition_(cfg_.partition ? *cfg_.partition : Partition::singletons(env_->num_agents())),
      opt_(OptimizerConfig{OptimizerKind::RmsProp, cfg_.lr}),
      replay_(resolve_replay_capacity(cfg_, env_->default_horizon())),
      explore_rng_(make_rng(cfg_.seed, 601)), replay_rng_(make_rng(cfg_.seed, 602)),
      rd_rng_(make_rng(cfg_.seed, 603)) {
    if (partition_.num_agents() != n_)
        throw ConfigError("Trainer: partition covers " + std::to_string(partition_.num_agents()) +
                          " agents, environment has " + std::to_string(n_));
    if (cfg_.gamma < 0.0 || cfg_.gamma >= 1.0)
        throw ConfigError("Trainer: gamma must lie in [0, 1)");
    if (!cfg_.use_mixers) {
        for (const auto &block : partition_.blocks())
            if (block.size() != 1)
                throw ConfigError("Trainer: IQL mode requires the singleton partition");
    }
    if (cfg_.kappa < 0)
        throw ConfigError("Trainer: kappa must be >= 0");
    build_nets();
    if (cfg_.reward_source == RewardSource::Decomposed) {
        std::vector<int> obs_dims(static_cast<size_t>(n_)), action_counts(static_cast<size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            obs_dims[i] = env_->obs_dim(i);
            action_counts[i] = env_->num_actions(i);
        }
        decomposer_.emplace(env_->graph(), obs_dims, action_counts, cfg_.rd, cfg_.seed);
    }
}

void Trainer::build_nets() {
    auto init_rng = make_rng(cfg_.seed, 600);

    std::vector<int> obs_dims(static_cast<size_t>(n_)), action_counts(static_cast<size_t>(n_));
    bool homogeneous = true;
    for (int i = 0; i < n_; ++i) {
        obs_dims[i] = env_->obs_dim(i);
        action_counts[i] = env_->num_actions(i);
        homogeneous = homogeneous && obs_dims[i] == obs_dims[0] &&
                      action_counts[i] == action_counts[0];
    }
    utils_.shared = cfg_.share_utilities && homogeneous;
    utils_.n = n_;
    utils_.obs_dims = obs_dims;
    utils_.action_counts = action_counts;
    if (utils_.shared) {
        utils_.nets.emplace_back(
            std::vector<int>{obs_dims[0] + n_, cfg_.utility_hidden, action_counts[0]},
            std::vector<Activation>{Activation::Relu, Activation::Identity}, init_rng);
    } else {
        for (int i = 0; i < n_; ++i)
            utils_.nets.emplace_back(
                std::vector<int>{obs_dims[i], cfg_.utility_hidden, action_counts[i]},
                std::vector<Activation>{Activation::Relu, Activation::Identity}, init_rng);
    }

    const auto &graph = env_->graph();
    blocks_.clear();
    std::map<std::pair<int, int>, int> group_of; // (block size, input arity) -> mixer group
    for (const auto &members : partition_.blocks()) {
        BlockInfo info;
        info.members = members;
        if (cfg_.use_mixers) {
            const auto inputs = graph.block_input_set(members, cfg_.kappa);
            info.inputs.assign(inputs.begin(), inputs.end());
        } else {
            info.inputs = members; // IQL: the block value is the agent's own utility
        }
        const std::pair<int, int> key{static_cast<int>(members.size()),
                                      static_cast<int>(info.inputs.size())};
        if (cfg_.use_mixers) {
            int group;
            if (cfg_.share_mixers && group_of.count(key)) {
                group = group_of[key];
            } else {
                group = static_cast<int>(mixers_.size());
                mixers_.emplace_back(
                    std::vector<int>{static_cast<int>(info.inputs.size()), cfg_.mixing_hidden,
                                     cfg_.mixing_hidden, 1},
                    std::vector<Activation>{Activation::Elu, Activation::Elu,
                                            Activation::Identity},
                    init_rng);
                if (cfg_.share_mixers)
                    group_of[key] = group;
            }
            info.group = group;
        }
        blocks_.push_back(std::move(info));
    }
    if (cfg_.mode == MonotonicityMode::Hard)
        for (auto &mixer : mixers_)
            mixer.relu_project_weights();

    for (auto &net : utils_.nets)
        opt_.attach(net);
    for (auto &mixer : mixers_)
        opt_.attach(mixer);

    target_utils_ = utils_;
    target_mixers_ = mixers_;
}

void Trainer::refresh_targets() {
    target_utils_ = utils_;
    target_mixers_ = mixers_;
}

double Trainer::epsilon_at(long step) const {
    if (cfg_.eps_anneal_steps <= 0 || step >= cfg_.eps_anneal_steps)
        return cfg_.eps_end; // floor reached exactly at the anneal horizon
    const double frac =
        static_cast<double>(step) / static_cast<double>(cfg_.eps_anneal_steps);
    return cfg_.eps_start - (cfg_.eps_start - cfg_.eps_end) * frac;
}

std::vector<int> Trainer::greedy_action(const Obs &obs) const {
    return greedy_joint_action(utils_, obs);
}

std::vector<int> Trainer::explore_action(const std::vector<int> &greedy, double eps) {
    return epsilon_greedy(greedy, eps, utils_.action_counts, explore_rng_,
                          cfg_.per_agent_exploration);
}

double Trainer::block_value(int block, std::span<const double> inputs) const {
    const BlockInfo &info = blocks_[block];
    if (inputs.size() != info.inputs.size())
        throw std::invalid_argument("block_value: input arity mismatch");
    if (!cfg_.use_mixers)
        return inputs[0];
    return mixers_[info.group].forward(inputs)[0];
}

std::vector<double> Trainer::chosen_utilities(const Obs &obs,
                                              const std::vector<int> &action) const {
    std::vector<double> u(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i)
        u[i] = utils_.values(i, obs[i])[action[i]];
    return u;
}

std::vector<double> Trainer::td_targets_one(const Transition &tr) const {
    std::vector<double> y(blocks_.size(), 0.0);
    std::vector<double> umax;
    if (!tr.done) {
        umax.resize(static_cast<size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            const auto values = target_utils_.values(i, tr.next_obs[i]);
            umax[i] = *std::max_element(values.begin(), values.end());
        }
    }
    for (size_t b = 0; b < blocks_.size(); ++b) {
        const BlockInfo &info = blocks_[b];
        double r_term = 0.0;
        if (tr.has_local) {
            for (int j : info.members)
                r_term += tr.r_local[j];
        } else {
            // block share of the global signal when no local channel exists
            r_term = tr.r_global * static_cast<double>(info.members.size()) /
                     static_cast<double>(n_);
        }
        if (tr.done) {
            y[b] = r_term;
            continue;
        }
        double bootstrap;
        if (cfg_.use_mixers) {
            std::vector<double> x(info.inputs.size());
            for (size_t k = 0; k < info.inputs.size(); ++k)
                x[k] = umax[info.inputs[k]];
            bootstrap = target_mixers_[info.group].forward(x)[0];
        } else {
            bootstrap = umax[info.members[0]];
        }
        y[b] = r_term + cfg_.gamma * bootstrap;
    }
    return y;
}

std::vector<std::vector<double>> Trainer::td_targets(const std::vector<Transition> &batch) const {
    std::vector<std::vector<double>> out;
    out.reserve(batch.size());
    for (const auto &tr : batch) {
        if (cfg_.reward_source == RewardSource::Local && !tr.has_local)
            throw ConfigError("td_targets: transition lacks local rewards in local-reward mode");
        out.push_back(td_targets_one(tr));
    }
    return out;
}

double Trainer::train_step() {
    if (replay_.size() < static_cast<size_t>(cfg_.batch_size))
        throw std::logic_error("train_step: replay buffer smaller than one batch");
    std::vector<Transition> batch;
    batch.reserve(static_cast<size_t>(cfg_.batch_size));
    for (int k = 0; k < cfg_.batch_size; ++k)
        batch.push_back(replay_.sample(replay_rng_));
    return train_step_on(batch);
}

double Trainer::train_step_on(const std::vector<Transition> &batch) {
    std::vector<MlpGrads> util_grads;
    util_grads.reserve(utils_.nets.size());
    for (auto &net : utils_.nets)
        util_grads.push_back(net.make_grads());
    std::vector<MlpGrads> mixer_grads;
    mixer_grads.reserve(mixers_.size());
    for (auto &mixer : mixers_)
        mixer_grads.push_back(mixer.make_grads());

    const double loss = compute_loss_and_grads(batch, &util_grads, &mixer_grads);

    std::vector<const MlpGrads *> ptrs;
    ptrs.reserve(util_grads.size() + mixer_grads.size());
    for (const auto &g : util_grads)
        ptrs.push_back(&g);
    for (const auto &g : mixer_grads)
        ptrs.push_back(&g);
    opt_.step(ptrs);
    ++train_steps_;

    if (cfg_.mode == MonotonicityMode::Hard)
        for (auto &mixer : mixers_)
            mixer.relu_project_weights();
    return loss;
}

double Trainer::compute_loss_and_grads(const std::vector<Transition> &batch,
                                       std::vector<MlpGrads> *util_grads,
                                       std::vector<MlpGrads> *mixer_grads) const {
    if (batch.empty())
        throw std::invalid_argument("compute_loss_and_grads: empty batch");
    const bool with_grads = util_grads != nullptr && mixer_grads != nullptr;
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    double loss = 0.0;
    double penalty = 0.0;
    std::vector<ForwardCache> util_caches(static_cast<size_t>(n_));
    std::vector<double> u(static_cast<size_t>(n_));
    std::vector<double> du(static_cast<size_t>(n_));
    std::vector<ForwardCache> mixer_caches(blocks_.size());

    for (const auto &tr : batch) {
        const auto y = td_targets_one(tr);
        for (int i = 0; i < n_; ++i) {
            const auto values = utils_.values(i, tr.obs[i], util_caches[i]);
            u[i] = values[tr.action[i]];
        }
        std::fill(du.begin(), du.end(), 0.0);
        for (size_t b = 0; b < blocks_.size(); ++b) {
            const BlockInfo &info = blocks_[b];
            double f;
            if (cfg_.use_mixers) {
                std::vector<double> x(info.inputs.size());
                for (size_t k = 0; k < info.inputs.size(); ++k)
                    x[k] = u[info.inputs[k]];
                f = mixers_[info.group].forward(x, mixer_caches[b])[0];
            } else {
                f = u[info.members[0]];
            }
            const double diff = f - y[b];
            loss += diff * diff;
            const double dl_df = 2.0 * diff * inv_b;
            if (cfg_.use_mixers) {
                if (with_grads) {
                    const double dl_vec[1] = {dl_df};
                    const auto din = mixers_[info.group].backward(mixer_caches[b], dl_vec,
                                                                  (*mixer_grads)[info.group]);
                    for (size_t k = 0; k < info.inputs.size(); ++k)
                        du[info.inputs[k]] += din[k];
                }
                if (cfg_.mode == MonotonicityMode::Soft) {
                    const auto g = mixers_[info.group].input_gradient(mixer_caches[b]);
                    std::vector<double> dir(g.size(), 0.0);
                    bool any = false;
                    for (size_t k = 0; k < g.size(); ++k) {
                        if (g[k] < 0.0) {
                            penalty += -g[k];
                            dir[k] = -cfg_.lambda_mono * inv_b;
                            any = true;
                        }
                    }
                    if (any && with_grads)
                        mixers_[info.group].input_gradient_param_backward(
                            mixer_caches[b], dir, (*mixer_grads)[info.group]);
                }
            } else if (with_grads) {
                du[info.members[0]] += dl_df;
            }
        }
        if (with_grads) {
            for (int i = 0; i < n_; ++i) {
                if (du[i] == 0.0)
                    continue;
                std::vector<double> dl_dy(static_cast<size_t>(utils_.action_counts[i]), 0.0);
                dl_dy[tr.action[i]] = du[i];
                utils_.net_for(i).backward(util_caches[i], dl_dy,
                                           (*util_grads)[utils_.shared ? 0
                                                                       : static_cast<size_t>(i)]);
            }
        }
    }
    loss *= inv_b;
    penalty *= inv_b;
    last_penalty_ = penalty;
    if (!std::isfinite(loss)) {
        std::ostringstream oss;
        oss << "train_step: non-finite loss on a batch of " << batch.size()
            << " transitions; first r_global=" << batch.front().r_global;
        throw TrainingError(oss.str());
    }
    return loss + cfg_.lambda_mono * penalty;
}

double Trainer::min_mixer_weight() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto &mixer : mixers_)
        lo = std::min(lo, mixer.min_weight());
    return mixers_.empty() ? 0.0 : lo;
}

Transition Trainer::make_transition(const Obs &obs, const std::vector<int> &action,
                                    const EnvStep &step) {
    Transition tr;
    tr.obs = obs;
    tr.next_obs = step.next_obs;
    tr.action = action;
    tr.r_global = step.r_global;
    tr.done = step.done;
    switch (cfg_.reward_source) {
    case RewardSource::Local:
        if (!step.r_local)
            throw ConfigError("Trainer: environment provides no local rewards in local mode");
        tr.r_local = *step.r_local;
        tr.has_local = true;
        break;
    case RewardSource::GlobalEvenSplit:
        tr.r_local.assign(static_cast<size_t>(n_), step.r_global / static_cast<double>(n_));
        tr.has_local = true;
        break;
    case RewardSource::Decomposed: {
        if (decomposer_ && decomposer_->trained_enough()) {
            if (auto inferred = decomposer_->infer_local(obs, action, step.r_global)) {
                tr.r_local = std::move(*inferred);
                tr.has_local = true;
                break;
            }
        }
        tr.rd_failed = true;
        if (cfg_.rd.fallback == RdFallback::EvenSplit) {
            tr.r_local.assign(static_cast<size_t>(n_), step.r_global / static_cast<double>(n_));
            tr.has_local = true;
        } else {
            tr.has_local = false; // targets fall back to the block share of r_global
        }
        break;
    }
    }
    return tr;
}

double Trainer::rd_train_maybe() {
    if (!decomposer_ || replay_.size() < static_cast<size_t>(cfg_.rd.batch_size))
        return 0.0;
    if (steps_taken_ % std::max<long>(1, cfg_.rd.train_interval) != 0)
        return 0.0;
    std::vector<RewardDecomposer::Sample> batch;
    batch.reserve(static_cast<size_t>(cfg_.rd.batch_size));
    for (int k = 0; k < cfg_.rd.batch_size; ++k) {
        const Transition &tr = replay_.sample(rd_rng_);
        batch.push_back({&tr.obs, &tr.action, tr.r_global});
    }
    return decomposer_->train_step(batch);
}

RunSummary Trainer::run_training(long steps, const TrainCallbacks &cb) {
    RunSummary summary;
    const long warmup = std::max<long>(cfg_.warmup > 0 ? cfg_.warmup : cfg_.batch_size,
                                       cfg_.batch_size);
    Obs obs = env_->reset(mix_seed(mix_seed(cfg_.seed) + 0xE9000 +
                                   static_cast<uint64_t>(episodes_done_)));
    for (long k = 0; k < steps; ++k) {
        const double eps = epsilon_at(steps_taken_);
        const auto greedy = greedy_action(obs);
        const auto action = explore_action(greedy, eps);
        const auto step = env_->step(action);
        replay_.push(make_transition(obs, action, step));
        obs = step.next_obs;
        ++steps_taken_;

        rd_train_maybe();
        if (replay_.size() >= static_cast<size_t>(warmup) &&
            steps_taken_ % std::max<long>(1, cfg_.train_interval) == 0) {
            train_step();
            if (cb.post_train_step)
                cb.post_train_step(steps_taken_);
        }

        if (step.done || step.truncated) {
            ++episodes_done_;
            if (cfg_.target_period_episodes > 0 &&
                episodes_done_ % cfg_.target_period_episodes == 0) {
                refresh_targets();
                ++target_refreshes_;
            }
            obs = env_->reset(mix_seed(mix_seed(cfg_.seed) + 0xE9000 +
                                       static_cast<uint64_t>(episodes_done_)));
        }
        if (cfg_.eval_interval > 0 && steps_taken_ % cfg_.eval_interval == 0) {
            const auto stats = evaluate();
            summary.evals.emplace_back(steps_taken_, stats);
            if (cb.on_eval)
                cb.on_eval(steps_taken_, stats);
        }
    }
    summary.steps = steps_taken_;
    summary.episodes = episodes_done_;
    summary.target_refreshes = target_refreshes_;
    summary.train_steps = train_steps_;
    return summary;
}

EvalStats Trainer::evaluate(int episodes) {
    if (episodes < 0)
        episodes = cfg_.eval_episodes;
    // decentralized by construction: the policy closure sees utilities only
    const UtilityNets &utilities_only = utils_;
    const uint64_t eval_seed_base = mix_seed(mix_seed(cfg_.seed) + 0xEEEE);
    return evaluate_policy(
        *eval_env_,
        [&utilities_only](const Obs &o) { return greedy_joint_action(utilities_only, o); },
        episodes, eval_seed_base);
}

void Trainer::save_checkpoint(const std::string &path) const {
    std::vector<std::pair<std::string, const Mlp *>> nets;
    if (utils_.shared) {
        nets.emplace_back("utility", &utils_.nets[0]);
    } else {
        for (int i = 0; i < n_; ++i)
            nets.emplace_back("utility_" + std::to_string(i), &utils_.nets[i]);
    }
    for (size_t g = 0; g < mixers_.size(); ++g)
        nets.emplace_back("mixer_" + std::to_string(g), &mixers_[g]);
    save_params(path, nets);
}

void Trainer::load_checkpoint(const std::string &path) {
    auto loaded = load_params(path);
    auto find = [&](const std::string &name) -> Mlp * {
        for (auto &[n, net] : loaded)
            if (n == name)
                return &net;
        return nullptr;
    };
    auto assign = [&](Mlp &dst, const std::string &name) {
        Mlp *src = find(name);
        if (!src)
            throw IoError("checkpoint missing net '" + name + "'");
        if (src->input_dim() != dst.input_dim() || src->output_dim() != dst.output_dim())
            throw IoError("checkpoint net '" + name + "' has mismatched dimensions");
        dst = std::move(*src);
    };
    if (utils_.shared) {
        assign(utils_.nets[0], "utility");
    } else {
        for (int i = 0; i < n_; ++i)
            assign(utils_.nets[i], "utility_" + std::to_string(i));
    }
    for (size_t g = 0; g < mixers_.size(); ++g)
        assign(mixers_[g], "mixer_" + std::to_string(g));
    refresh_targets();
}

} // namespace lomaq
