#pragma once

#include <array>
#include <string>
#include <vector>

#include "config.hpp"
#include "matrix_game.hpp"
#include "trainer.hpp"

namespace lomaq {

// Output root resolution; the LOMAQ_LAB_OUT environment variable reroots
// relative output paths.
std::string resolve_out_dir(const std::string &out);

EnvFactory env_factory_from(const Config &cfg);
Partition partition_from(const std::string &spec, int n);
TrainerConfig trainer_config_from(const Config &cfg, int n, uint64_t seed);

/// Per-eval-step aggregate across seeds of the per-seed test-return means.
struct MetricRow {
    long step = 0;
    std::vector<double> per_seed;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

std::vector<MetricRow> aggregate_metrics(const std::vector<std::vector<std::pair<long, EvalStats>>> &per_seed);

/// Multi-seed training suite: one subdirectory per seed holding metrics.csv,
/// checkpoints and a run.json manifest, plus aggregate.csv at the root.
/// Throws after finishing if any seed run failed (partial artifacts remain).
void run_train_suite(const Config &cfg, const std::string &out_dir);

void run_bandit_suite(const Config &cfg, const std::string &out_csv);

void run_eval(const Config &cfg, const std::string &out_dir);

/// One greedy episode rolled into a CSV: t, agent, the agent's observation at
/// decision time, its action, then the step's local and global rewards.
void dump_trajectory(Env &env, const std::function<std::vector<int>(const Obs &)> &policy,
                     uint64_t seed, const std::string &csv_path);

struct MatrixGameResult {
    Partition partition;
    std::vector<std::array<std::array<double, 2>, 2>> learned_blocks; // per block
    std::array<std::array<double, 2>, 2> learned_global{};
    MatrixGameTables targets;

    // max entrywise error of one learned block against a target table
    double block_error(size_t block, const PayoffTable &target) const;
    double global_error() const;
};

/// Trains LOMAQ on the two-player payoff game with gamma=0 and eps=1, then
/// tabulates the learned block values over all four joint actions.
MatrixGameResult matrix_game_experiment(const Partition &partition, uint64_t seed, long steps,
                                        const Config *overrides = nullptr);

void run_matrix_game(const Config &cfg, const std::string &out_dir);

struct DecomposeVizResult {
    std::vector<std::string> names; // per subset, plus "r_pred" appended
    std::vector<double> grid;       // dx values
    // value[(name_index * grid + i1) * grid + i2]
    std::vector<double> values;
    double heldout_mean_abs_residual = 0.0;
    double mean_abs_pair = 0.0; // mean |r_{0,1}| over the grid (0 when absent)
    double pred_both_on_landmark = 0.0;
};

/// Fits a reward decomposer on teleport-sampled two-agent/one-landmark
/// navigation data and evaluates every subset net over a distance grid.
DecomposeVizResult decompose_viz_experiment(int max_card, double lambda, uint64_t seed,
                                            long train_steps, long samples, double grid_step);

void run_decompose_viz(const Config &cfg, const std::string &out_csv);

/// Dispatch on [run] kind: train, bandit, eval, matrix-game, decompose-viz.
void run_experiment(const Config &cfg, const std::string &out_override);

std::string format_double(double v);

} // namespace lomaq
