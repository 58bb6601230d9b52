#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "bandit.hpp"
#include "decoupled_chain.hpp"
#include "errors.hpp"
#include "multi_cart_pole.hpp"
#include "navigation.hpp"
#include "rng.hpp"

namespace lomaq {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string resolve_out_dir(const std::string &out) {
    const char *root = std::getenv("LOMAQ_LAB_OUT");
    if (root && *root && !fs::path(out).is_absolute())
        return (fs::path(root) / out).string();
    return out;
}

Partition partition_from(const std::string &spec, int n) {
    if (spec == "singletons")
        return Partition::singletons(n);
    if (spec == "joint")
        return Partition::joint(n);
    return Partition::load(spec, n);
}

EnvFactory env_factory_from(const Config &cfg) {
    const std::string name = cfg.get_str("env", "name", "decoupled_chain");
    const std::string reward = cfg.get_str("algo", "reward", "local");
    const bool local_channels = reward == "local";

    auto finish = [local_channels](auto env) -> std::unique_ptr<Env> {
        env->set_local_rewards(local_channels);
        return env;
    };

    if (name == "matrix_game") {
        return [finish] { return finish(std::make_unique<MatrixGame>()); };
    }
    if (name == "multi_cart_pole" || name == "cartpole") {
        CartPoleParams p;
        p.n = static_cast<int>(cfg.get_int("env", "n", p.n));
        p.cart_mass = cfg.get_real("env", "cart_mass", p.cart_mass);
        p.pole_mass = cfg.get_real("env", "pole_mass", p.pole_mass);
        p.pole_half_length = cfg.get_real("env", "pole_half_length", p.pole_half_length);
        p.gravity = cfg.get_real("env", "gravity", p.gravity);
        p.force_mag = cfg.get_real("env", "force_mag", p.force_mag);
        p.dt = cfg.get_real("env", "dt", p.dt);
        p.fail_angle_deg = cfg.get_real("env", "fail_angle_deg", p.fail_angle_deg);
        p.spring_k = cfg.get_real("env", "spring_k", p.spring_k);
        p.rest_spacing = cfg.get_real("env", "rest_spacing", p.rest_spacing);
        p.horizon = cfg.get_int("env", "horizon", p.horizon);
        return [p, finish] { return finish(std::make_unique<CoupledMultiCartPole>(p)); };
    }
    if (name == "bounded_navigation" || name == "navigation" || name == "nav2") {
        NavigationParams p = name == "nav2" ? nav2_params() : NavigationParams{};
        if (name != "nav2") {
            p.n = static_cast<int>(cfg.get_int("env", "n", p.n));
            p.num_landmarks = static_cast<int>(cfg.get_int("env", "landmarks", -1));
            p.seed = static_cast<uint64_t>(cfg.get_int("env", "seed", 0));
        }
        p.region_radius = cfg.get_real("env", "region_radius", p.region_radius);
        p.cover_radius = cfg.get_real("env", "cover_radius", p.cover_radius);
        p.step_size = cfg.get_real("env", "step_size", p.step_size);
        p.arena = cfg.get_real("env", "arena", p.arena);
        p.horizon = cfg.get_int("env", "horizon", p.horizon);
        return [p, finish] { return finish(std::make_unique<BoundedCooperativeNavigation>(p)); };
    }
    if (name == "decoupled_chain" || name == "chain") {
        DecoupledChainParams p;
        p.n = static_cast<int>(cfg.get_int("env", "n", p.n));
        p.states = static_cast<int>(cfg.get_int("env", "states", p.states));
        p.actions = static_cast<int>(cfg.get_int("env", "actions", p.actions));
        p.horizon = cfg.get_int("env", "horizon", p.horizon);
        p.seed = static_cast<uint64_t>(cfg.get_int("env", "seed", 0));
        return [p, finish] { return finish(std::make_unique<DecoupledChain>(p)); };
    }
    throw ConfigError("unknown environment: " + name);
}

TrainerConfig trainer_config_from(const Config &cfg, int n, uint64_t seed) {
    TrainerConfig tc;
    tc.seed = seed;
    tc.partition = partition_from(cfg.get_str("algo", "partition", "singletons"), n);
    tc.kappa = static_cast<int>(cfg.get_int("algo", "kappa", tc.kappa));
    tc.gamma = cfg.get_real("algo", "gamma", tc.gamma);
    tc.eps_start = cfg.get_real("algo", "eps_start", tc.eps_start);
    tc.eps_end = cfg.get_real("algo", "eps_end", tc.eps_end);
    tc.eps_anneal_steps = cfg.get_int("algo", "eps_anneal_steps", tc.eps_anneal_steps);
    tc.lr = cfg.get_real("algo", "lr", tc.lr);
    tc.target_period_episodes = cfg.get_int("algo", "target_period", tc.target_period_episodes);
    tc.batch_size = static_cast<int>(cfg.get_int("algo", "batch_size", tc.batch_size));
    const std::string mode = cfg.get_str("algo", "monotonicity", "hard");
    if (mode == "hard")
        tc.mode = MonotonicityMode::Hard;
    else if (mode == "soft")
        tc.mode = MonotonicityMode::Soft;
    else
        throw ConfigError("algo.monotonicity must be hard or soft");
    tc.lambda_mono = cfg.get_real("algo", "lambda_mono", tc.lambda_mono);
    tc.utility_hidden = static_cast<int>(cfg.get_int("algo", "utility_hidden", tc.utility_hidden));
    tc.mixing_hidden = static_cast<int>(cfg.get_int("algo", "mixing_hidden", tc.mixing_hidden));
    tc.share_utilities = cfg.get_bool("algo", "share_utilities", tc.share_utilities);
    tc.share_mixers = cfg.get_bool("algo", "share_mixers", tc.share_mixers);
    const std::string algorithm = cfg.get_str("algo", "algorithm", "lomaq");
    if (algorithm == "lomaq")
        tc.use_mixers = true;
    else if (algorithm == "iql")
        tc.use_mixers = false;
    else
        throw ConfigError("algo.algorithm must be lomaq or iql");
    tc.per_agent_exploration = cfg.get_bool("algo", "per_agent_exploration", false);
    const std::string reward = cfg.get_str("algo", "reward", "local");
    if (reward == "local")
        tc.reward_source = RewardSource::Local;
    else if (reward == "global")
        tc.reward_source = RewardSource::GlobalEvenSplit;
    else if (reward == "rd")
        tc.reward_source = RewardSource::Decomposed;
    else
        throw ConfigError("algo.reward must be local, global, or rd");
    tc.replay_capacity = cfg.get_int("algo", "replay_capacity", 0);
    tc.train_interval = cfg.get_int("algo", "train_interval", tc.train_interval);
    tc.warmup = cfg.get_int("algo", "warmup", 0);
    tc.eval_interval = cfg.get_int("algo", "eval_interval", tc.eval_interval);
    tc.eval_episodes = static_cast<int>(cfg.get_int("algo", "eval_episodes", tc.eval_episodes));

    tc.rd.max_card = static_cast<int>(cfg.get_int("rd", "max_card", tc.rd.max_card));
    tc.rd.lr = cfg.get_real("rd", "lr", tc.rd.lr);
    tc.rd.delta = cfg.get_real("rd", "delta", -1.0);
    tc.rd.lambda = cfg.get_real("rd", "lambda", tc.rd.lambda);
    tc.rd.batch_size = static_cast<int>(cfg.get_int("rd", "batch_size", tc.rd.batch_size));
    tc.rd.window = static_cast<int>(cfg.get_int("rd", "window", tc.rd.window));
    const std::string fallback = cfg.get_str("rd", "fallback", "even_split");
    if (fallback == "even_split")
        tc.rd.fallback = RdFallback::EvenSplit;
    else if (fallback == "skip")
        tc.rd.fallback = RdFallback::Skip;
    else
        throw ConfigError("rd.fallback must be even_split or skip");
    tc.rd.share_by_cardinality = cfg.get_bool("rd", "share", true);
    tc.rd.train_interval = cfg.get_int("rd", "train_interval", tc.rd.train_interval);
    return tc;
}

std::vector<MetricRow>
aggregate_metrics(const std::vector<std::vector<std::pair<long, EvalStats>>> &per_seed) {
    std::vector<MetricRow> rows;
    if (per_seed.empty())
        return rows;
    const size_t points = per_seed.front().size();
    for (const auto &seq : per_seed)
        if (seq.size() != points)
            throw std::invalid_argument("aggregate_metrics: seed runs have different eval grids");
    for (size_t k = 0; k < points; ++k) {
        MetricRow row;
        row.step = per_seed.front()[k].first;
        double total = 0.0;
        row.min = std::numeric_limits<double>::infinity();
        row.max = -std::numeric_limits<double>::infinity();
        for (const auto &seq : per_seed) {
            const double v = seq[k].second.mean;
            row.per_seed.push_back(v);
            total += v;
            row.min = std::min(row.min, v);
            row.max = std::max(row.max, v);
        }
        row.mean = total / static_cast<double>(per_seed.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

json manifest_json(const Config &cfg, uint64_t seed, long steps, const std::string &out_dir) {
    json m;
    m["seed"] = seed;
    m["steps"] = steps;
    m["out"] = out_dir;
    json raw = json::object(), resolved = json::object();
    for (const auto &[section, kv] : cfg.raw()) {
        for (const auto &[k, v] : kv)
            raw[section][k] = v;
    }
    for (const auto &[section, kv] : cfg.resolved()) {
        for (const auto &[k, v] : kv)
            resolved[section][k] = v;
    }
    m["config"]["raw"] = raw;
    m["config"]["resolved"] = resolved;
    return m;
}

void write_text(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << text;
    if (!out)
        throw IoError("failed writing " + path);
}

} // namespace

void run_train_suite(const Config &cfg, const std::string &out_dir) {
    const auto seeds = cfg.get_seeds("run", "seeds", {0, 1, 2});
    const long steps = cfg.get_int("run", "steps", 200000);
    fs::create_directories(out_dir);

    std::vector<std::vector<std::pair<long, EvalStats>>> per_seed;
    std::vector<std::string> failures;
    for (const uint64_t seed : seeds) {
        const fs::path seed_dir = fs::path(out_dir) / ("seed_" + std::to_string(seed));
        fs::create_directories(seed_dir);
        try {
            auto factory = env_factory_from(cfg);
            const int n = factory()->num_agents();
            Trainer trainer(factory, trainer_config_from(cfg, n, seed));

            std::ofstream metrics(seed_dir / "metrics.csv");
            metrics << "step,test_return_mean,test_return_min,test_return_max\n";
            std::vector<std::pair<long, EvalStats>> evals;
            TrainCallbacks cb;
            cb.on_eval = [&](long step, const EvalStats &stats) {
                metrics << step << "," << format_double(stats.mean) << ","
                        << format_double(stats.min) << "," << format_double(stats.max) << "\n";
                metrics.flush();
                trainer.save_checkpoint(
                    (seed_dir / ("checkpoint_" + std::to_string(step) + ".txt")).string());
                evals.emplace_back(step, stats);
            };
            trainer.run_training(steps, cb);
            trainer.save_checkpoint((seed_dir / "checkpoint_final.txt").string());
            write_text((seed_dir / "run.json").string(),
                       manifest_json(cfg, seed, steps, seed_dir.string()).dump(2) + "\n");
            per_seed.push_back(std::move(evals));
        } catch (const std::exception &e) {
            failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
        }
    }

    if (failures.empty() && !per_seed.empty()) {
        const auto rows = aggregate_metrics(per_seed);
        std::ofstream agg(fs::path(out_dir) / "aggregate.csv");
        agg << "step,mean,min,max\n";
        for (const auto &row : rows)
            agg << row.step << "," << format_double(row.mean) << "," << format_double(row.min)
                << "," << format_double(row.max) << "\n";
    }
    if (!failures.empty()) {
        std::string msg = "train suite: " + std::to_string(failures.size()) + " run(s) failed:";
        for (const auto &f : failures)
            msg += "\n  " + f;
        throw TrainingError(msg);
    }
}

void run_bandit_suite(const Config &cfg, const std::string &out_csv) {
    LinearBanditEnv::Params env_params;
    env_params.n = static_cast<int>(cfg.get_int("bandit", "n", 6));
    env_params.actions = static_cast<int>(cfg.get_int("bandit", "k", 2));
    env_params.dim = static_cast<int>(cfg.get_int("bandit", "d", 4));
    env_params.sigma = cfg.get_real("bandit", "sigma", 0.1);
    const long horizon = cfg.get_int("bandit", "horizon", 20000);
    MultiOful::Config algo;
    algo.alpha = cfg.get_real("bandit", "alpha", algo.alpha);
    algo.lambda = cfg.get_real("bandit", "lambda", algo.lambda);
    algo.delta = cfg.get_real("bandit", "delta", algo.delta);
    algo.enumeration_budget = cfg.get_real("bandit", "budget", algo.enumeration_budget);
    const auto partition =
        partition_from(cfg.get_str("bandit", "partition", "singletons"), env_params.n);
    const auto seeds = cfg.get_seeds("run", "seeds", {0, 1, 2});

    if (const auto parent = fs::path(out_csv).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(out_csv);
    if (!out)
        throw IoError("cannot write " + out_csv);
    out << "seed,t,cumulative_regret\n";
    for (const uint64_t seed : seeds) {
        const auto result = run_bandit_experiment(env_params, partition, algo, horizon, seed);
        for (size_t t = 0; t < result.cumulative_regret.size(); ++t)
            out << seed << "," << (t + 1) << "," << format_double(result.cumulative_regret[t])
                << "\n";
    }
}

void dump_trajectory(Env &env, const std::function<std::vector<int>(const Obs &)> &policy,
                     uint64_t seed, const std::string &csv_path) {
    if (const auto parent = fs::path(csv_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(csv_path);
    if (!out)
        throw IoError("cannot write " + csv_path);
    out << "t,agent";
    for (int k = 0; k < env.obs_dim(0); ++k)
        out << ",obs" << k;
    out << ",action,r_local,r_global\n";
    Obs obs = env.reset(seed);
    for (long t = 0;; ++t) {
        const auto action = policy(obs);
        const auto step = env.step(action);
        for (int i = 0; i < env.num_agents(); ++i) {
            out << t << "," << i;
            for (double v : obs[i])
                out << "," << format_double(v);
            const double local = step.r_local ? (*step.r_local)[i] : 0.0;
            out << "," << action[i] << "," << format_double(local) << ","
                << format_double(step.r_global) << "\n";
        }
        obs = step.next_obs;
        if (step.done || step.truncated)
            break;
    }
}

void run_eval(const Config &cfg, const std::string &out_dir) {
    const std::string checkpoint = cfg.get_str("eval", "checkpoint", "");
    if (checkpoint.empty())
        throw ConfigError("eval: a checkpoint path is required");
    const int episodes = static_cast<int>(cfg.get_int("eval", "episodes", 20));
    const auto seeds = cfg.get_seeds("run", "seeds", {0});
    auto factory = env_factory_from(cfg);
    const int n = factory()->num_agents();
    Trainer trainer(factory, trainer_config_from(cfg, n, seeds.front()));
    trainer.load_checkpoint(checkpoint);
    const auto stats = trainer.evaluate(episodes);
    std::cout << "eval over " << episodes << " episodes: mean=" << format_double(stats.mean)
              << " min=" << format_double(stats.min) << " max=" << format_double(stats.max)
              << "\n";
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "eval.csv");
    out << "episodes,mean,min,max\n";
    out << episodes << "," << format_double(stats.mean) << "," << format_double(stats.min) << ","
        << format_double(stats.max) << "\n";

    const std::string trajectory = cfg.get_str("eval", "trajectory", "");
    if (!trajectory.empty()) {
        auto env = factory();
        const UtilityNets &utilities_only = trainer.utilities();
        dump_trajectory(
            *env,
            [&utilities_only](const Obs &o) { return greedy_joint_action(utilities_only, o); },
            seeds.front(), trajectory);
    }
}

double MatrixGameResult::block_error(size_t block, const PayoffTable &target) const {
    double err = 0.0;
    for (int a0 = 0; a0 < 2; ++a0)
        for (int a1 = 0; a1 < 2; ++a1)
            err = std::max(err, std::fabs(learned_blocks[block][a0][a1] - target[a0][a1]));
    return err;
}

double MatrixGameResult::global_error() const {
    double err = 0.0;
    for (int a0 = 0; a0 < 2; ++a0)
        for (int a1 = 0; a1 < 2; ++a1)
            err = std::max(err, std::fabs(learned_global[a0][a1] - targets.qglobal[a0][a1]));
    return err;
}

MatrixGameResult matrix_game_experiment(const Partition &partition, uint64_t seed, long steps,
                                        const Config *overrides) {
    TrainerConfig tc;
    tc.partition = partition;
    tc.gamma = 0.0;
    tc.eps_start = tc.eps_end = 1.0; // uniform visitation probes all four joint actions
    tc.eval_interval = 0;
    tc.seed = seed;
    tc.lr = 0.002; // the four-point regression needs a hotter step than the control tasks
    if (overrides) {
        tc.lr = overrides->get_real("algo", "lr", tc.lr);
        tc.batch_size = static_cast<int>(overrides->get_int("algo", "batch_size", tc.batch_size));
        tc.utility_hidden =
            static_cast<int>(overrides->get_int("algo", "utility_hidden", tc.utility_hidden));
        tc.mixing_hidden =
            static_cast<int>(overrides->get_int("algo", "mixing_hidden", tc.mixing_hidden));
    }
    Trainer trainer([] { return std::make_unique<MatrixGame>(); }, tc);
    trainer.run_training(steps);

    MatrixGameResult result{partition, {}, {}, matrix_game_tables()};
    MatrixGame game;
    const Obs obs = game.reset(0);
    result.learned_blocks.resize(partition.blocks().size());
    for (int a0 = 0; a0 < 2; ++a0) {
        for (int a1 = 0; a1 < 2; ++a1) {
            const std::vector<int> action{a0, a1};
            const auto u = trainer.chosen_utilities(obs, action);
            double total = 0.0;
            for (size_t b = 0; b < partition.blocks().size(); ++b) {
                const auto &inputs = trainer.block_inputs(static_cast<int>(b));
                std::vector<double> x;
                x.reserve(inputs.size());
                for (int agent : inputs)
                    x.push_back(u[agent]);
                const double f = trainer.block_value(static_cast<int>(b), x);
                result.learned_blocks[b][a0][a1] = f;
                total += f;
            }
            result.learned_global[a0][a1] = total;
        }
    }
    return result;
}

void run_matrix_game(const Config &cfg, const std::string &out_dir) {
    const auto seeds = cfg.get_seeds("run", "seeds", {0});
    const long steps = cfg.get_int("run", "steps", 30000);
    const std::string spec = cfg.get_str("algo", "partition", "joint");
    const auto partition = partition_from(spec, 2);

    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "matrix_game.csv");
    out << "seed,block,a1,a2,learned,target\n";
    for (const uint64_t seed : seeds) {
        const auto result = matrix_game_experiment(partition, seed, steps, &cfg);
        auto target_for = [&](size_t b) -> const PayoffTable & {
            const auto &members = partition.blocks()[b];
            if (members.size() == 2)
                return result.targets.qglobal;
            return members[0] == 0 ? result.targets.q1 : result.targets.q2;
        };
        for (size_t b = 0; b < partition.blocks().size(); ++b) {
            std::string label;
            for (int m : partition.blocks()[b])
                label += std::to_string(m);
            const auto &target = target_for(b);
            for (int a0 = 0; a0 < 2; ++a0)
                for (int a1 = 0; a1 < 2; ++a1)
                    out << seed << "," << label << "," << a0 << "," << a1 << ","
                        << format_double(result.learned_blocks[b][a0][a1]) << ","
                        << format_double(target[a0][a1]) << "\n";
            std::cout << "seed " << seed << " block {" << label
                      << "} max error = " << format_double(result.block_error(b, target)) << "\n";
        }
        for (int a0 = 0; a0 < 2; ++a0)
            for (int a1 = 0; a1 < 2; ++a1)
                out << seed << ",global," << a0 << "," << a1 << ","
                    << format_double(result.learned_global[a0][a1]) << ","
                    << format_double(result.targets.qglobal[a0][a1]) << "\n";
        std::cout << "seed " << seed
                  << " global max error = " << format_double(result.global_error()) << "\n";
    }
}

DecomposeVizResult decompose_viz_experiment(int max_card, double lambda, uint64_t seed,
                                            long train_steps, long samples, double grid_step) {
    auto params = nav2_params();
    BoundedCooperativeNavigation env(params);
    env.reset(seed);

    RdConfig rd;
    rd.max_card = max_card;
    rd.lambda = lambda;
    rd.delta = 0.2;
    std::vector<int> obs_dims(2, env.obs_dim(0)), action_counts(2, env.num_actions(0));
    RewardDecomposer dec(env.graph(), obs_dims, action_counts, rd, seed);

    // teleport-sampled dataset: positions uniform by area within each region
    auto rng = make_rng(seed, 700);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample_position = [&](int agent) {
        const double r = params.region_radius * std::sqrt(unit(rng));
        const double a = 2.0 * std::numbers::pi * unit(rng);
        const Vec2 &home = env.homes()[agent];
        return Vec2{home.x + r * std::cos(a), home.y + r * std::sin(a)};
    };
    struct Record {
        Obs obs;
        std::vector<int> action;
        double r = 0.0;
    };
    auto draw = [&]() {
        Record rec;
        env.teleport({sample_position(0), sample_position(1)});
        rec.obs = env.observe();
        rec.action = {static_cast<int>(rng() % 5), static_cast<int>(rng() % 5)};
        rec.r = env.step(rec.action).r_global;
        return rec;
    };
    std::vector<Record> data;
    data.reserve(static_cast<size_t>(samples));
    for (long k = 0; k < samples; ++k)
        data.push_back(draw());

    std::uniform_int_distribution<size_t> pick(0, data.size() - 1);
    for (long it = 0; it < train_steps; ++it) {
        std::vector<RewardDecomposer::Sample> batch;
        batch.reserve(static_cast<size_t>(rd.batch_size));
        for (int b = 0; b < rd.batch_size; ++b) {
            const Record &rec = data[pick(rng)];
            batch.push_back({&rec.obs, &rec.action, rec.r});
        }
        dec.train_step(batch);
    }

    DecomposeVizResult out;
    for (const auto &subset : dec.subsets()) {
        std::string name = "r";
        for (int agent : subset)
            name += "_" + std::to_string(agent);
        out.names.push_back(name);
    }
    out.names.push_back("r_pred");
    for (double dx = 0.0; dx <= 0.5 + 1e-9; dx += grid_step)
        out.grid.push_back(dx);

    const Vec2 lm = env.landmarks()[0];
    const size_t g = out.grid.size();
    out.values.assign(out.names.size() * g * g, 0.0);
    double pair_total = 0.0;
    long pair_count = 0;
    for (size_t i1 = 0; i1 < g; ++i1) {
        for (size_t i2 = 0; i2 < g; ++i2) {
            env.teleport({{lm.x - out.grid[i1], lm.y}, {lm.x + out.grid[i2], lm.y}});
            const Obs obs = env.observe();
            const std::vector<int> stay{0, 0};
            double pred = 0.0;
            for (size_t s = 0; s < dec.subsets().size(); ++s) {
                const double v = dec.subset_value(s, obs, stay);
                out.values[(s * g + i1) * g + i2] = v;
                pred += v;
                if (dec.subsets()[s].size() == 2) {
                    pair_total += std::fabs(v);
                    ++pair_count;
                }
            }
            out.values[((out.names.size() - 1) * g + i1) * g + i2] = pred;
            if (i1 == 0 && i2 == 0)
                out.pred_both_on_landmark = pred;
        }
    }
    out.mean_abs_pair = pair_count > 0 ? pair_total / static_cast<double>(pair_count) : 0.0;

    // held-out residual on fresh draws
    double residual = 0.0;
    const long heldout = 2000;
    for (long k = 0; k < heldout; ++k) {
        const Record rec = draw();
        residual += std::fabs(dec.predict_global(rec.obs, rec.action) - rec.r);
    }
    out.heldout_mean_abs_residual = residual / static_cast<double>(heldout);
    return out;
}

void run_decompose_viz(const Config &cfg, const std::string &out_csv) {
    const int max_card = static_cast<int>(cfg.get_int("rd", "max_card", 2));
    const double lambda = cfg.get_real("rd", "lambda", 0.0);
    const auto seeds = cfg.get_seeds("run", "seeds", {0});
    const long steps = cfg.get_int("run", "steps", 40000);
    const long samples = cfg.get_int("run", "samples", 30000);
    const double grid_step = cfg.get_real("run", "grid_step", 0.05);

    const auto result =
        decompose_viz_experiment(max_card, lambda, seeds.front(), steps, samples, grid_step);
    if (const auto parent = fs::path(out_csv).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(out_csv);
    if (!out)
        throw IoError("cannot write " + out_csv);
    out << "dx1,dx2,r_I_name,value\n";
    const size_t g = result.grid.size();
    for (size_t name = 0; name < result.names.size(); ++name)
        for (size_t i1 = 0; i1 < g; ++i1)
            for (size_t i2 = 0; i2 < g; ++i2)
                out << format_double(result.grid[i1]) << "," << format_double(result.grid[i2])
                    << "," << result.names[name] << ","
                    << format_double(result.values[(name * g + i1) * g + i2]) << "\n";
    std::cout << "decompose-viz: held-out mean |r_pred - r| = "
              << format_double(result.heldout_mean_abs_residual)
              << ", r_pred(both on landmark) = " << format_double(result.pred_both_on_landmark)
              << ", mean |pair| = " << format_double(result.mean_abs_pair) << "\n";
}

void run_experiment(const Config &cfg, const std::string &out_override) {
    const std::string kind = cfg.get_str("run", "kind", "");
    std::string out = out_override.empty() ? cfg.get_str("run", "out", "runs/out") : out_override;
    out = resolve_out_dir(out);
    if (kind == "train")
        run_train_suite(cfg, out);
    else if (kind == "bandit")
        run_bandit_suite(cfg, out);
    else if (kind == "eval")
        run_eval(cfg, out);
    else if (kind == "matrix-game")
        run_matrix_game(cfg, out);
    else if (kind == "decompose-viz")
        run_decompose_viz(cfg, out);
    else
        throw ConfigError("run.kind must be one of train, bandit, eval, matrix-game, "
                          "decompose-viz (got '" +
                          kind + "')");
}

} // namespace lomaq
