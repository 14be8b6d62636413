#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trajlab/trajectory.hpp"

namespace trajlab {

// Unit conversion constants (exact).
inline constexpr double kFeetPerMile = 5280.0;
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kFtpsToMph = kSecondsPerHour / kFeetPerMile;

// Generalized (Edie) aggregation over a space-time grid: every bin holds the
// total distance traveled and total time spent inside it; speed/flow/density
// derive as d/t, d/|A|, t/|A|.
struct MacroField {
    double x0 = 0.0, t0 = 0.0;
    double dx = 100.0, dt = 30.0;
    int nx = 0, nt = 0;
    Eigen::ArrayXXd dist;  // nx rows, nt cols, feet
    Eigen::ArrayXXd time;  // nx rows, nt cols, seconds
    int direction = 0;  // -1/+1 when the field was direction-filtered
    int lane = 0;       // 1-based lane when lane-filtered, else 0

    static constexpr double kEmptyTime = 1e-6;  // below this a bin is empty

    bool in_grid(int ix, int it) const {
        return ix >= 0 && ix < nx && it >= 0 && it < nt;
    }
    bool empty_bin(int ix, int it) const { return time(ix, it) < kEmptyTime; }
    double bin_area() const { return dx * dt; }
    // Speed is undefined on empty bins (reported as NaN, never 0).
    double speed(int ix, int it) const;
    double flow(int ix, int it) const;     // veh/s per ft of grid, q = d/|A|
    double density(int ix, int it) const;  // veh/ft, k = t/|A|
};

struct EdieOptions {
    double dx = 100.0;
    double dt = 30.0;
    std::optional<int> direction;   // keep only this direction
    std::optional<int> lane;        // keep only this lane (1-based)
    double lane_width_ft = 12.0;
    // Grid origin/extent; unset -> tight bounds over the input samples.
    std::optional<double> x_begin, x_end, t_begin, t_end;
};

// Edie aggregation with exact segment clipping at bin boundaries: each
// inter-sample segment contributes its traversed distance and elapsed time
// to every bin it crosses.
MacroField edie_field(const Dataset& dataset, const EdieOptions& options);

// Lane index from a lateral offset: lane 1 is innermost. Throws DataError
// when the sign of y contradicts the direction.
int lane_of(double y_position, int direction, double lane_width_ft);

struct FDPoint {
    double density_vpm = 0.0;  // vehicles per mile
    double flow_vph = 0.0;     // vehicles per hour
    double speed_mph = 0.0;
    double x_bin_start = 0.0;
    double t_bin_start = 0.0;
    std::string region;
};

struct FieldRegion {
    double x_begin = 0.0, x_end = 0.0;
    double t_begin = 0.0, t_end = 0.0;
    std::string tag;
};

// One FDPoint per nonempty bin whose start corner lies inside the region.
// Throws DataError when the region lies outside the field.
std::vector<FDPoint> fundamental_diagram_points(const MacroField& field,
                                                const FieldRegion& region);

// CSV interchange: a `# meta` header line carrying the grid, then one row
// per bin (x_bin_start, t_bin_start, d_ft, t_s, v_ftps, q_vph, k_vpm with
// empty speed cells on empty bins).
std::string write_field_csv(const MacroField& field);
MacroField parse_field_csv(const std::string& text);
MacroField read_field_csv_file(const std::string& path);

}  // namespace trajlab
