#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lomaq {

/// Undirected agent graph. Adjacency is stored without self-loops; the closed
/// neighborhood N(i) always includes i itself. Immutable once built, safe to
/// share across threads.
class AgentGraph {
public:
    AgentGraph() = default;
    explicit AgentGraph(int n);

    static AgentGraph line(int n);
    static AgentGraph from_edges(int n, const std::vector<std::pair<int, int>> &edges);

    // Text format: first line "n", then one "i j" line per edge.
    static AgentGraph load(const std::string &path);
    static AgentGraph parse(const std::string &text);

    void add_edge(int i, int j);

    int num_agents() const { return n_; }
    bool has_edge(int i, int j) const;
    std::vector<std::pair<int, int>> edges() const;

    // Open neighborhood (excludes i).
    const std::set<int> &adjacent(int i) const;

    // N(i) = {j : (i,j) in E} ∪ {i}.
    std::set<int> closed_neighborhood(int i) const;

    // All agents within graph distance kappa of i (BFS ball; kappa=0 -> {i}).
    std::set<int> k_hop(int i, int kappa) const;

    // ∪_{j in block} k_hop(j, kappa); the input set wired into a block's mixer.
    std::set<int> block_input_set(const std::vector<int> &block, int kappa) const;

private:
    void check_index(int i) const;

    int n_ = 0;
    std::vector<std::set<int>> adj_;
};

/// Disjoint cover of the agent set {0..n-1}. Blocks are kept sorted.
class Partition {
public:
    Partition(std::vector<std::vector<int>> blocks, int n);

    static Partition singletons(int n);
    static Partition joint(int n);

    // Text format: one line per block, space-separated agent indices.
    static Partition load(const std::string &path, int n);
    static Partition parse(const std::string &text, int n);

    int num_agents() const { return n_; }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    const std::vector<std::vector<int>> &blocks() const { return blocks_; }
    const std::vector<int> &block(int j) const { return blocks_[j]; }
    int block_of(int agent) const;

    std::string describe() const;

private:
    int n_ = 0;
    std::vector<std::vector<int>> blocks_;
    std::vector<int> block_of_;
};

// True iff every block of `fine` is contained in some block of `coarse`.
// Throws if the partitions cover different agent counts.
bool is_refinement(const Partition &fine, const Partition &coarse);

} // namespace lomaq
