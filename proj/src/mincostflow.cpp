#include "trajlab/mincostflow.hpp"

#include <limits>
#include <queue>

#include "trajlab/errors.hpp"

namespace trajlab {

MinCostFlow::MinCostFlow(std::size_t node_count) : arcs_(node_count) {}

std::size_t MinCostFlow::add_node() {
    arcs_.emplace_back();
    return arcs_.size() - 1;
}

std::size_t MinCostFlow::add_arc(std::size_t from, std::size_t to, int capacity,
                                 double cost) {
    if (from >= arcs_.size() || to >= arcs_.size())
        throw DataError("min-cost-flow arc endpoint out of range");
    arcs_[from].push_back({to, capacity, cost, arcs_[to].size()});
    arcs_[to].push_back({from, 0, -cost, arcs_[from].size() - 1});
    arc_refs_.emplace_back(from, arcs_[from].size() - 1);
    return arc_refs_.size() - 1;
}

MinCostFlow::Result MinCostFlow::solve(std::size_t source, std::size_t sink) {
    const std::size_t n = arcs_.size();
    Result result;
    for (;;) {
        // Bellman-Ford (SPFA queue variant) shortest path in the residual graph.
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        std::vector<std::pair<std::size_t, std::size_t>> parent(n, {n, 0});
        std::vector<bool> in_queue(n, false);
        std::queue<std::size_t> queue;
        dist[source] = 0.0;
        queue.push(source);
        in_queue[source] = true;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop();
            in_queue[u] = false;
            for (std::size_t k = 0; k < arcs_[u].size(); ++k) {
                const Arc& arc = arcs_[u][k];
                if (arc.capacity <= 0) continue;
                const double cand = dist[u] + arc.cost;
                if (cand < dist[arc.to] - 1e-12) {
                    dist[arc.to] = cand;
                    parent[arc.to] = {u, k};
                    if (!in_queue[arc.to]) {
                        queue.push(arc.to);
                        in_queue[arc.to] = true;
                    }
                }
            }
        }
        if (!(dist[sink] < -1e-9)) break;  // no improving augmentation left

        // Bottleneck along the path.
        int bottleneck = std::numeric_limits<int>::max();
        for (std::size_t v = sink; v != source;) {
            const auto [u, k] = parent[v];
            bottleneck = std::min(bottleneck, arcs_[u][k].capacity);
            v = u;
        }
        for (std::size_t v = sink; v != source;) {
            const auto [u, k] = parent[v];
            Arc& fwd = arcs_[u][k];
            fwd.capacity -= bottleneck;
            arcs_[fwd.to][fwd.reverse].capacity += bottleneck;
            v = u;
        }
        result.total_cost += dist[sink] * bottleneck;
        result.total_flow += bottleneck;
    }
    return result;
}

int MinCostFlow::arc_flow(std::size_t arc_index) const {
    const auto [node, slot] = arc_refs_.at(arc_index);
    const Arc& fwd = arcs_[node][slot];
    // Flow pushed equals the capacity now parked on the reverse arc.
    return arcs_[fwd.to][fwd.reverse].capacity;
}

}  // namespace trajlab
