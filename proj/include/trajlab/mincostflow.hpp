#pragma once

#include <cstddef>
#include <vector>

namespace trajlab {

// Small exact min-cost-flow solver (successive shortest augmenting paths
// with Bellman-Ford label correction, so negative arc costs are allowed).
// Augments while the shortest source->sink path has negative cost, which
// yields the minimum-cost flow over all flow values.
class MinCostFlow {
public:
    explicit MinCostFlow(std::size_t node_count);

    std::size_t add_node();
    // Returns the arc index; use arc_flow() after solve.
    std::size_t add_arc(std::size_t from, std::size_t to, int capacity, double cost);

    struct Result {
        double total_cost = 0.0;
        int total_flow = 0;
    };
    Result solve(std::size_t source, std::size_t sink);

    int arc_flow(std::size_t arc_index) const;

private:
    struct Arc {
        std::size_t to;
        int capacity;
        double cost;
        std::size_t reverse;  // index of the reverse arc in arcs_[to]
    };
    std::vector<std::vector<Arc>> arcs_;
    std::vector<std::pair<std::size_t, std::size_t>> arc_refs_;  // node, slot
};

}  // namespace trajlab
