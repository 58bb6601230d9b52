#include "matrix_game.hpp"

#include <algorithm>
#include <stdexcept>

namespace lomaq {

MatrixGameTables matrix_game_tables() {
    MatrixGameTables t;
    for (int a1 = 0; a1 < 2; ++a1) {
        for (int a2 = 0; a2 < 2; ++a2) {
            t.q1[a1][a2] = static_cast<double>(a1 + a2);
            t.q2[a1][a2] = 1.0 + std::max(0.0, 1.0 - a1 - a2);
            t.qglobal[a1][a2] = 2.0 + std::max(0.0, static_cast<double>(a1 + a2 - 1));
        }
    }
    return t;
}

MatrixGame::MatrixGame() : graph_(AgentGraph::from_edges(2, {{0, 1}})) {}

Obs MatrixGame::reset(uint64_t) {
    done_ = false;
    return Obs{{0.0}, {0.0}};
}

EnvStep MatrixGame::step(const std::vector<int> &action) {
    if (done_)
        throw std::logic_error("MatrixGame: step after episode end");
    if (action.size() != 2 || action[0] < 0 || action[0] > 1 || action[1] < 0 || action[1] > 1)
        throw std::invalid_argument("MatrixGame: action must be two binary choices");
    done_ = true;
    const auto tables = matrix_game_tables();
    EnvStep out;
    out.next_obs = Obs{{0.0}, {0.0}};
    const double r1 = tables.q1[action[0]][action[1]];
    const double r2 = tables.q2[action[0]][action[1]];
    out.r_global = r1 + r2;
    if (local_rewards_)
        out.r_local = std::vector<double>{r1, r2};
    out.done = true;
    return out;
}

} // namespace lomaq
