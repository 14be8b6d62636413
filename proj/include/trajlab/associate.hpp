#pragma once

#include <string>
#include <vector>

#include "trajlab/synth.hpp"
#include "trajlab/trajectory.hpp"

namespace trajlab {

// Gating and cost weights for fragment association. All costs are
// non-negative; an edge exists only when fragment B starts after fragment A
// ends, within max_gap, with matching direction and a prediction error
// inside the gate.
struct GatingParams {
    double max_gap_s = 15.0;
    double max_prediction_error_ft = 60.0;
    double max_lateral_offset_ft = 8.0;
    double weight_gap = 1.0;            // per second of time gap
    double weight_prediction = 0.25;    // per foot of constant-velocity error
    double weight_lateral = 1.0;        // per foot of lateral offset
    double weight_dimension = 0.5;      // per foot of summed dimension mismatch
    double entry_cost = 15.0;
    double exit_cost = 15.0;
    double velocity_window_s = 1.0;     // tail/head regression window
};

struct AssociationEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double cost = 0.0;
};

// Candidate graph over fragments (indices into the input order).
struct AssociationGraph {
    std::vector<AssociationEdge> edges;
    std::size_t fragment_count = 0;
};

AssociationGraph build_association_graph(const std::vector<Trajectory>& fragments,
                                         const GatingParams& gating);

// Partition of fragment indices into time-ordered chains, obtained from an
// exact unit-capacity min-cost-flow solve over the candidate graph.
std::vector<std::vector<std::size_t>> associate_fragments(
    const std::vector<Trajectory>& fragments, const GatingParams& gating);

// Total association cost of a given partition under the gating params
// (entry + edges + exit per chain). Used for optimality checks and reports.
double partition_cost(const std::vector<Trajectory>& fragments,
                      const std::vector<std::vector<std::size_t>>& chains,
                      const GatingParams& gating);

// Concatenates a chain into one trajectory, filling interior gaps on the
// 25 Hz grid with cubic Hermite segments matched to the end velocities.
// Dimensions are duration-weighted means; the id comes from the first
// fragment. Throws DataError when chain fragments overlap in time.
Trajectory stitch(const std::vector<Trajectory>& chain);

// Convenience: run association + stitch over a fragment set.
struct AssociationResult {
    std::vector<std::vector<std::size_t>> chains;
    std::vector<Trajectory> stitched;
    double flow_cost = 0.0;
};
AssociationResult associate_and_stitch(const std::vector<Trajectory>& fragments,
                                       const GatingParams& gating);

// Estimated velocity of a fragment end by least-squares over the trailing
// (or leading) window. Exposed for cost diagnostics and tests.
double tail_velocity(const Trajectory& fragment, double window_s);
double head_velocity(const Trajectory& fragment, double window_s);

GatingParams parse_gating_params(const std::string& text);
GatingParams read_gating_file(const std::string& path);

}  // namespace trajlab
