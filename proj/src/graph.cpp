#include "graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace lomaq {

AgentGraph::AgentGraph(int n) : n_(n), adj_(static_cast<size_t>(std::max(n, 0))) {
    if (n < 1)
        throw std::invalid_argument("AgentGraph: agent count must be >= 1");
}

AgentGraph AgentGraph::line(int n) {
    AgentGraph g(n);
    for (int i = 0; i + 1 < n; ++i)
        g.add_edge(i, i + 1);
    return g;
}

AgentGraph AgentGraph::from_edges(int n, const std::vector<std::pair<int, int>> &edges) {
    AgentGraph g(n);
    for (auto [i, j] : edges)
        g.add_edge(i, j);
    return g;
}

AgentGraph AgentGraph::load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open graph file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

AgentGraph AgentGraph::parse(const std::string &text) {
    std::istringstream in(text);
    int n = 0;
    if (!(in >> n))
        throw IoError("graph file: missing agent count");
    AgentGraph g(n);
    int i, j;
    while (in >> i >> j)
        g.add_edge(i, j);
    if (!in.eof() && in.fail()) {
        in.clear();
        std::string tail;
        in >> tail;
        if (!tail.empty())
            throw IoError("graph file: malformed edge line near '" + tail + "'");
    }
    return g;
}

void AgentGraph::add_edge(int i, int j) {
    check_index(i);
    check_index(j);
    if (i == j)
        throw std::invalid_argument("AgentGraph: self-loops are not allowed");
    adj_[i].insert(j);
    adj_[j].insert(i);
}

bool AgentGraph::has_edge(int i, int j) const {
    check_index(i);
    check_index(j);
    return adj_[i].count(j) > 0;
}

std::vector<std::pair<int, int>> AgentGraph::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < n_; ++i)
        for (int j : adj_[i])
            if (i < j)
                out.emplace_back(i, j);
    return out;
}

const std::set<int> &AgentGraph::adjacent(int i) const {
    check_index(i);
    return adj_[i];
}

std::set<int> AgentGraph::closed_neighborhood(int i) const {
    check_index(i);
    std::set<int> out = adj_[i];
    out.insert(i);
    return out;
}

std::set<int> AgentGraph::k_hop(int i, int kappa) const {
    check_index(i);
    if (kappa < 0)
        throw std::invalid_argument("k_hop: kappa must be >= 0");
    std::set<int> visited{i};
    std::deque<int> frontier{i};
    for (int depth = 0; depth < kappa && !frontier.empty(); ++depth) {
        std::deque<int> next;
        for (int u : frontier)
            for (int v : adj_[u])
                if (visited.insert(v).second)
                    next.push_back(v);
        frontier.swap(next);
    }
    return visited;
}

std::set<int> AgentGraph::block_input_set(const std::vector<int> &block, int kappa) const {
    if (block.empty())
        throw std::invalid_argument("block_input_set: block must be non-empty");
    std::set<int> out;
    for (int j : block) {
        auto ball = k_hop(j, kappa);
        out.insert(ball.begin(), ball.end());
    }
    return out;
}

void AgentGraph::check_index(int i) const {
    if (i < 0 || i >= n_)
        throw std::invalid_argument("AgentGraph: agent index " + std::to_string(i) +
                                    " out of range [0, " + std::to_string(n_) + ")");
}

Partition::Partition(std::vector<std::vector<int>> blocks, int n) : n_(n), blocks_(std::move(blocks)) {
    if (n < 1)
        throw std::invalid_argument("Partition: agent count must be >= 1");
    block_of_.assign(n, -1);
    for (size_t b = 0; b < blocks_.size(); ++b) {
        auto &blk = blocks_[b];
        if (blk.empty())
            throw std::invalid_argument("Partition: empty block");
        std::sort(blk.begin(), blk.end());
        for (int i : blk) {
            if (i < 0 || i >= n)
                throw std::invalid_argument("Partition: agent index out of range");
            if (block_of_[i] != -1)
                throw std::invalid_argument("Partition: agent " + std::to_string(i) +
                                            " appears in more than one block");
            block_of_[i] = static_cast<int>(b);
        }
    }
    for (int i = 0; i < n; ++i)
        if (block_of_[i] == -1)
            throw std::invalid_argument("Partition: agent " + std::to_string(i) + " not covered");
    std::sort(blocks_.begin(), blocks_.end());
    for (int i = 0; i < n; ++i)
        block_of_[i] = -1;
    for (size_t b = 0; b < blocks_.size(); ++b)
        for (int i : blocks_[b])
            block_of_[i] = static_cast<int>(b);
}

Partition Partition::singletons(int n) {
    std::vector<std::vector<int>> blocks;
    blocks.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        blocks.push_back({i});
    return Partition(std::move(blocks), n);
}

Partition Partition::joint(int n) {
    std::vector<int> all(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        all[i] = i;
    return Partition({all}, n);
}

Partition Partition::load(const std::string &path, int n) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open partition file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), n);
}

Partition Partition::parse(const std::string &text, int n) {
    std::istringstream in(text);
    std::vector<std::vector<int>> blocks;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<int> blk;
        int i;
        while (ls >> i)
            blk.push_back(i);
        if (!blk.empty())
            blocks.push_back(std::move(blk));
    }
    return Partition(std::move(blocks), n);
}

int Partition::block_of(int agent) const {
    if (agent < 0 || agent >= n_)
        throw std::invalid_argument("Partition: agent index out of range");
    return block_of_[agent];
}

std::string Partition::describe() const {
    std::string s;
    for (const auto &blk : blocks_) {
        s += "{";
        for (size_t k = 0; k < blk.size(); ++k) {
            if (k)
                s += ",";
            s += std::to_string(blk[k]);
        }
        s += "}";
    }
    return s;
}

bool is_refinement(const Partition &fine, const Partition &coarse) {
    if (fine.num_agents() != coarse.num_agents())
        throw std::invalid_argument("is_refinement: partitions cover different agent counts");
    for (const auto &blk : fine.blocks()) {
        const int host = coarse.block_of(blk.front());
        for (int i : blk)
            if (coarse.block_of(i) != host)
                return false;
    }
    return true;
}

} // namespace lomaq
