#include "qsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lomaq {

long joint_action_count(const std::vector<int> &action_counts) {
    long total = 1;
    for (int k : action_counts) {
        if (k < 1)
            throw std::invalid_argument("joint_action_count: action counts must be >= 1");
        total *= k;
    }
    return total;
}

std::vector<int> decode_joint_action(long index, const std::vector<int> &action_counts) {
    std::vector<int> action(action_counts.size(), 0);
    for (size_t i = action_counts.size(); i-- > 0;) {
        action[i] = static_cast<int>(index % action_counts[i]);
        index /= action_counts[i];
    }
    return action;
}

QsmResult qsm_check(const std::vector<std::vector<double>> &q_tables,
                    const std::vector<int> &action_counts, const Partition &partition,
                    double tol, double budget) {
    const int n = static_cast<int>(q_tables.size());
    if (n != partition.num_agents() || static_cast<int>(action_counts.size()) != n)
        throw std::invalid_argument("qsm_check: table/partition arity mismatch");
    const long total = joint_action_count(action_counts);
    if (static_cast<double>(total) > budget)
        throw std::invalid_argument("qsm_check: joint action space exceeds enumeration budget");
    for (const auto &table : q_tables)
        if (static_cast<long>(table.size()) != total)
            throw std::invalid_argument("qsm_check: table size must equal the joint action count");

    QsmResult out;
    out.lhs = -std::numeric_limits<double>::infinity();
    for (long a = 0; a < total; ++a) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            sum += q_tables[i][a];
        out.lhs = std::max(out.lhs, sum);
    }
    out.rhs = 0.0;
    for (const auto &block : partition.blocks()) {
        double best = -std::numeric_limits<double>::infinity();
        for (long a = 0; a < total; ++a) {
            double sum = 0.0;
            for (int i : block)
                sum += q_tables[i][a];
            best = std::max(best, sum);
        }
        out.rhs += best;
    }
    out.gap = out.lhs - out.rhs;
    out.holds = std::fabs(out.gap) <= tol;
    return out;
}

double monotone_gradient_check(const Mlp &mixer, int samples, std::mt19937_64 &rng, double h,
                               double range) {
    std::uniform_real_distribution<double> point(-range, range);
    double min_slope = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(mixer.input_dim()));
    for (int s = 0; s < samples; ++s) {
        for (double &v : u)
            v = point(rng);
        for (size_t i = 0; i < u.size(); ++i) {
            const double saved = u[i];
            u[i] = saved + h;
            const double up = mixer.forward(u)[0];
            u[i] = saved - h;
            const double down = mixer.forward(u)[0];
            u[i] = saved;
            min_slope = std::min(min_slope, (up - down) / (2.0 * h));
        }
    }
    return std::max(0.0, -min_slope);
}

} // namespace lomaq
