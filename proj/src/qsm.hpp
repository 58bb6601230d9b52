#pragma once

#include <random>
#include <vector>

#include "graph.hpp"
#include "nn.hpp"

namespace lomaq {

struct QsmResult {
    bool holds = false;
    double gap = 0.0; // max_a sum_i Q_i  minus  sum_J max_a sum_{i in J} Q_i (always <= 0)
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Brute-force check of the partition maximization identity at one state.
/// q_tables[i][a] is agent i's partial Q at joint action index a, where joint
/// indices enumerate actions in mixed radix (last agent fastest). Throws when
/// the joint action space exceeds `budget`.
QsmResult qsm_check(const std::vector<std::vector<double>> &q_tables,
                    const std::vector<int> &action_counts, const Partition &partition,
                    double tol = 1e-9, double budget = 1e7);

long joint_action_count(const std::vector<int> &action_counts);
std::vector<int> decode_joint_action(long index, const std::vector<int> &action_counts);

/// Finite-difference probe of dF/du over random utility vectors drawn from
/// [-range, range]; returns max(0, -min derivative), i.e. 0 for a monotone map.
double monotone_gradient_check(const Mlp &mixer, int samples, std::mt19937_64 &rng,
                               double h = 1e-3, double range = 2.0);

} // namespace lomaq
