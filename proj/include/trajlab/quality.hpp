#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajlab/macrofield.hpp"
#include "trajlab/trajectory.hpp"

namespace trajlab {

// Axis-aligned footprint rectangle in roadway coordinates: the back-center
// reference point plus dimensions and travel direction.
struct Footprint {
    double x = 0.0;       // back center
    double y = 0.0;
    double length = 0.0;  // extends in the travel direction
    double width = 0.0;
    int direction = 1;
};

// Intersection-over-union of two footprint rectangles. Zero-area inputs
// give 0 unless both degenerate to the identical point.
double footprint_iou(const Footprint& a, const Footprint& b);

struct MatchPair {
    std::size_t pred_index;
    std::size_t gt_index;
    double iou;
};

struct TimestepMatch {
    std::vector<MatchPair> pairs;
    std::vector<std::size_t> unmatched_pred;
    std::vector<std::size_t> unmatched_gt;
};

// Maximum-total-IOU bipartite assignment among pairs with IOU >= iou_min.
// Pairs carried over from the previous timestep are kept first when still
// above the threshold (ID-switch accounting needs the continuity bias).
TimestepMatch match_timestep(const std::vector<Footprint>& pred,
                             const std::vector<Footprint>& gt, double iou_min,
                             const std::vector<MatchPair>& previous = {});

struct MotCounts {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t id_switches = 0;
    std::size_t gt_positions = 0;
    double matched_iou_sum = 0.0;
};

struct MetricsSummary {
    // tracking block
    double mota = 0.0;
    double motp_iou = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double gt_match_rate = 0.0;
    double pred_match_rate = 0.0;
    double per_gt_recall = 0.0;
    double per_pred_precision = 0.0;
    // feasibility block
    double feasible_accel = 0.0;
    double feasible_heading = 0.0;
    double feasible_direction = 0.0;
    double feasible_no_overlap = 0.0;
    // positional error block
    double x_error_mean = 0.0, x_error_std = 0.0, x_error_mae = 0.0;
    double y_error_mean = 0.0, y_error_std = 0.0, y_error_mae = 0.0;
    double length_error_mean = 0.0, length_error_std = 0.0, length_error_mae = 0.0;
    double width_error_mean = 0.0, width_error_std = 0.0, width_error_mae = 0.0;
    double height_error_mean = 0.0, height_error_std = 0.0, height_error_mae = 0.0;
    double within_1ft = 0.0;
    double within_3ft = 0.0;
    MotCounts counts;
};

// Full CLEAR-MOT style evaluation of predicted trajectories against ground
// truth on the shared 25 Hz grid. Throws DataError when the ground truth
// has zero positions.
MetricsSummary evaluate_tracking(const Dataset& predicted, const Dataset& ground_truth,
                                 double iou_min);

// Physical-feasibility fractions of a dataset on its own (no ground truth):
// |accel| < 10 ft/s^2, |heading| < 30 degrees, no backward movement, and
// the fraction of trajectories that never overlap another footprint.
struct FeasibilityThresholds {
    double max_accel_ftps2 = 10.0;
    double max_heading_deg = 30.0;
};
MetricsSummary feasibility_metrics(const Dataset& dataset,
                                   const FeasibilityThresholds& thresholds = {});

// Error statistics over matched pairs (fills the positional block).
struct MatchedState {
    double pred_x, pred_y, pred_length, pred_width, pred_height;
    double gt_x, gt_y, gt_length, gt_width, gt_height;
};
MetricsSummary positional_error_stats(const std::vector<MatchedState>& pairs);

// --- Artifact band detection -----------------------------------------

enum class BandKind { MissingPole, Overpass, PacketDrop };

struct DetectedBand {
    BandKind kind;
    double x_begin = 0.0, x_end = 0.0;
    double t_begin = 0.0, t_end = 0.0;
};

struct BandDetectionOptions {
    double time_span_fraction = 0.9;  // spatial band: covers >= 90% of time axis
    double pole_min_width_ft = 200.0;  // wider bands are missing poles
};

// Connected components of empty bins, classified per the artifact taxonomy.
std::vector<DetectedBand> detect_missing_bands(const MacroField& field,
                                               const BandDetectionOptions& options = {});

// Fragments-per-chain ratio from an association report.
double fragmentation_rate(const std::vector<std::vector<std::size_t>>& chains);

std::string write_metrics_json(const MetricsSummary& summary);
std::string write_bands_json(const std::vector<DetectedBand>& bands);

}  // namespace trajlab
