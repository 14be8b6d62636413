#include "trajlab/associate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "trajlab/errors.hpp"
#include "trajlab/mincostflow.hpp"

namespace trajlab {

namespace {

// Least-squares slope of x over t for sample indices [first, last].
double regression_velocity(const Trajectory& traj, std::size_t first, std::size_t last) {
    const std::size_t n = last - first + 1;
    if (n < 2) return 0.0;
    double st = 0, sx = 0, stt = 0, stx = 0;
    const double t0 = traj.timestamps[first];
    for (std::size_t i = first; i <= last; ++i) {
        const double t = traj.timestamps[i] - t0;
        st += t;
        sx += traj.x_positions[i];
        stt += t * t;
        stx += t * traj.x_positions[i];
    }
    const double denom = n * stt - st * st;
    if (denom <= 0.0) return 0.0;
    return (n * stx - st * sx) / denom;
}

std::size_t window_samples(double window_s) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(window_s * kGridHz));
}

double mean_tail_y(const Trajectory& traj, std::size_t count) {
    const std::size_t n = traj.size();
    const std::size_t first = n > count ? n - count : 0;
    double sum = 0.0;
    for (std::size_t i = first; i < n; ++i) sum += traj.y_positions[i];
    return sum / static_cast<double>(n - first);
}

double mean_head_y(const Trajectory& traj, std::size_t count) {
    const std::size_t last = std::min(count, traj.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < last; ++i) sum += traj.y_positions[i];
    return sum / static_cast<double>(last);
}

}  // namespace

double tail_velocity(const Trajectory& fragment, double window_s) {
    const std::size_t n = fragment.size();
    const std::size_t w = std::min(window_samples(window_s), n);
    return regression_velocity(fragment, n - w, n - 1);
}

double head_velocity(const Trajectory& fragment, double window_s) {
    const std::size_t n = fragment.size();
    const std::size_t w = std::min(window_samples(window_s), n);
    return regression_velocity(fragment, 0, w - 1);
}

AssociationGraph build_association_graph(const std::vector<Trajectory>& fragments,
                                         const GatingParams& gating) {
    AssociationGraph graph;
    graph.fragment_count = fragments.size();
    for (std::size_t a = 0; a < fragments.size(); ++a) {
        const Trajectory& fa = fragments[a];
        const double va = tail_velocity(fa, gating.velocity_window_s);
        const double ya = mean_tail_y(fa, window_samples(gating.velocity_window_s));
        for (std::size_t b = 0; b < fragments.size(); ++b) {
            if (a == b) continue;
            const Trajectory& fb = fragments[b];
            if (fb.direction != fa.direction) continue;
            const double gap = fb.first_timestamp - fa.last_timestamp;
            if (!(gap > 0.0) || gap > gating.max_gap_s) continue;

            const double predicted_x = fa.ending_x + va * gap;
            const double prediction_error = std::abs(predicted_x - fb.starting_x);
            if (prediction_error > gating.max_prediction_error_ft) continue;

            const double lateral = std::abs(
                ya - mean_head_y(fb, window_samples(gating.velocity_window_s)));
            if (lateral > gating.max_lateral_offset_ft) continue;

            const double dim_mismatch = std::abs(fa.length - fb.length) +
                                        std::abs(fa.width - fb.width) +
                                        std::abs(fa.height - fb.height);
            const double cost = gating.weight_gap * gap +
                                gating.weight_prediction * prediction_error +
                                gating.weight_lateral * lateral +
                                gating.weight_dimension * dim_mismatch;
            graph.edges.push_back({a, b, cost});
        }
    }
    return graph;
}

std::vector<std::vector<std::size_t>> associate_fragments(
    const std::vector<Trajectory>& fragments, const GatingParams& gating) {
    const std::size_t n = fragments.size();
    if (n == 0) return {};

    const AssociationGraph graph = build_association_graph(fragments, gating);

    // Unit-capacity flow: source -> in_f (entry), in_f -> out_f (mandatory,
    // large negative reward so every fragment is covered), out_f -> in_g
    // (link cost), out_f -> sink (exit).
    double big = gating.entry_cost + gating.exit_cost + 1.0;
    for (const AssociationEdge& e : graph.edges) big += e.cost;

    MinCostFlow flow(2 * n + 2);
    const std::size_t source = 2 * n, sink = 2 * n + 1;
    const auto in_node = [](std::size_t f) { return 2 * f; };
    const auto out_node = [](std::size_t f) { return 2 * f + 1; };

    for (std::size_t f = 0; f < n; ++f) {
        flow.add_arc(source, in_node(f), 1, gating.entry_cost);
        flow.add_arc(in_node(f), out_node(f), 1, -big);
        flow.add_arc(out_node(f), sink, 1, gating.exit_cost);
    }
    std::vector<std::size_t> link_arcs;
    link_arcs.reserve(graph.edges.size());
    for (const AssociationEdge& e : graph.edges)
        link_arcs.push_back(flow.add_arc(out_node(e.from), in_node(e.to), 1, e.cost));

    flow.solve(source, sink);

    std::vector<std::ptrdiff_t> successor(n, -1), predecessor(n, -1);
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        if (flow.arc_flow(link_arcs[k]) > 0) {
            successor[graph.edges[k].from] = static_cast<std::ptrdiff_t>(graph.edges[k].to);
            predecessor[graph.edges[k].to] =
                static_cast<std::ptrdiff_t>(graph.edges[k].from);
        }
    }

    std::vector<std::vector<std::size_t>> chains;
    for (std::size_t f = 0; f < n; ++f) {
        if (predecessor[f] >= 0) continue;  // not a chain head
        std::vector<std::size_t> chain;
        for (std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(f); cur >= 0;
             cur = successor[static_cast<std::size_t>(cur)])
            chain.push_back(static_cast<std::size_t>(cur));
        chains.push_back(std::move(chain));
    }
    // Deterministic order: by first fragment's start time, then index.
    std::sort(chains.begin(), chains.end(),
              [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
                  const double ta = fragments[a.front()].first_timestamp;
                  const double tb = fragments[b.front()].first_timestamp;
                  if (ta != tb) return ta < tb;
                  return a.front() < b.front();
              });
    return chains;
}

double partition_cost(const std::vector<Trajectory>& fragments,
                      const std::vector<std::vector<std::size_t>>& chains,
                      const GatingParams& gating) {
    const AssociationGraph graph = build_association_graph(fragments, gating);
    std::vector<std::vector<double>> edge_cost(
        fragments.size(),
        std::vector<double>(fragments.size(), std::numeric_limits<double>::quiet_NaN()));
    for (const AssociationEdge& e : graph.edges) edge_cost[e.from][e.to] = e.cost;

    double total = 0.0;
    for (const auto& chain : chains) {
        total += gating.entry_cost + gating.exit_cost;
        for (std::size_t i = 1; i < chain.size(); ++i) {
            const double c = edge_cost[chain[i - 1]][chain[i]];
            if (std::isnan(c)) throw DataError("partition uses a gated-out link");
            total += c;
        }
    }
    return total;
}

Trajectory stitch(const std::vector<Trajectory>& chain) {
    if (chain.empty()) throw DataError("cannot stitch an empty chain");
    for (std::size_t i = 1; i < chain.size(); ++i)
        if (!(chain[i].first_timestamp > chain[i - 1].last_timestamp))
            throw DataError("chain fragments overlap in time");

    Trajectory out = chain.front();
    double dim_weight = chain.front().duration() + kGridStep;
    out.length *= dim_weight;
    out.width *= dim_weight;
    out.height *= dim_weight;

    for (std::size_t i = 1; i < chain.size(); ++i) {
        const Trajectory& prev = chain[i - 1];
        const Trajectory& next = chain[i];

        // Fill interior grid timestamps with a cubic Hermite matched to the
        // boundary positions and regression end velocities.
        const double t0 = prev.last_timestamp, t1 = next.first_timestamp;
        const double span = t1 - t0;
        const double x0 = prev.ending_x, x1 = next.starting_x;
        const double y0 = prev.y_positions.back(), y1 = next.y_positions.front();
        const double vx0 = tail_velocity(prev, 1.0), vx1 = head_velocity(next, 1.0);

        const auto hermite = [&](double p0, double p1, double m0, double m1, double u) {
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * span * m0 +
                   (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * span * m1;
        };

        const long long k0 = std::llround(t0 * kGridHz);
        const long long k1 = std::llround(t1 * kGridHz);
        for (long long k = k0 + 1; k < k1; ++k) {
            const double t = static_cast<double>(k) / kGridHz;
            const double u = (t - t0) / span;
            out.timestamps.push_back(t);
            out.x_positions.push_back(hermite(x0, x1, vx0, vx1, u));
            out.y_positions.push_back(hermite(y0, y1, 0.0, 0.0, u));
        }
        out.timestamps.insert(out.timestamps.end(), next.timestamps.begin(),
                              next.timestamps.end());
        out.x_positions.insert(out.x_positions.end(), next.x_positions.begin(),
                               next.x_positions.end());
        out.y_positions.insert(out.y_positions.end(), next.y_positions.begin(),
                               next.y_positions.end());

        const double w = next.duration() + kGridStep;
        out.length += next.length * w;
        out.width += next.width * w;
        out.height += next.height * w;
        dim_weight += w;
    }
    out.length /= dim_weight;
    out.width /= dim_weight;
    out.height /= dim_weight;
    out.first_timestamp = out.timestamps.front();
    out.last_timestamp = out.timestamps.back();
    out.starting_x = out.x_positions.front();
    out.ending_x = out.x_positions.back();
    return out;
}

AssociationResult associate_and_stitch(const std::vector<Trajectory>& fragments,
                                       const GatingParams& gating) {
    AssociationResult result;
    result.chains = associate_fragments(fragments, gating);
    if (!result.chains.empty())
        result.flow_cost = partition_cost(fragments, result.chains, gating);
    result.stitched.reserve(result.chains.size());
    for (const auto& chain : result.chains) {
        std::vector<Trajectory> parts;
        parts.reserve(chain.size());
        for (std::size_t idx : chain) parts.push_back(fragments[idx]);
        result.stitched.push_back(stitch(parts));
    }
    return result;
}

GatingParams parse_gating_params(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    GatingParams g;
    g.max_gap_s = doc.value("max_gap_s", g.max_gap_s);
    g.max_prediction_error_ft =
        doc.value("max_prediction_error_ft", g.max_prediction_error_ft);
    g.max_lateral_offset_ft = doc.value("max_lateral_offset_ft", g.max_lateral_offset_ft);
    g.weight_gap = doc.value("weight_gap", g.weight_gap);
    g.weight_prediction = doc.value("weight_prediction", g.weight_prediction);
    g.weight_lateral = doc.value("weight_lateral", g.weight_lateral);
    g.weight_dimension = doc.value("weight_dimension", g.weight_dimension);
    g.entry_cost = doc.value("entry_cost", g.entry_cost);
    g.exit_cost = doc.value("exit_cost", g.exit_cost);
    g.velocity_window_s = doc.value("velocity_window_s", g.velocity_window_s);
    return g;
}

GatingParams read_gating_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open gating file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_gating_params(buf.str());
}

}  // namespace trajlab
