#include "trajlab/macrofield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "trajlab/errors.hpp"

namespace trajlab {

double MacroField::speed(int ix, int it) const {
    if (empty_bin(ix, it)) return std::numeric_limits<double>::quiet_NaN();
    return dist(ix, it) / time(ix, it);
}

double MacroField::flow(int ix, int it) const { return dist(ix, it) / bin_area(); }

double MacroField::density(int ix, int it) const { return time(ix, it) / bin_area(); }

int lane_of(double y_position, int direction, double lane_width_ft) {
    if (!(lane_width_ft > 0.0)) throw DataError("lane width must be positive");
    if (direction != 1 && direction != -1) throw DataError("direction must be -1 or +1");
    if (y_position * direction <= 0.0)
        throw DataError("lateral position is on the wrong side for this direction");
    return static_cast<int>(std::floor(std::abs(y_position) / lane_width_ft)) + 1;
}

namespace {

struct GridBounds {
    double x0, x1, t0, t1;
};

GridBounds data_bounds(const Dataset& dataset) {
    GridBounds b{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
    for (const Trajectory& traj : dataset.trajectories) {
        for (double x : traj.x_positions) {
            b.x0 = std::min(b.x0, x);
            b.x1 = std::max(b.x1, x);
        }
        if (!traj.timestamps.empty()) {
            b.t0 = std::min(b.t0, traj.timestamps.front());
            b.t1 = std::max(b.t1, traj.timestamps.back());
        }
    }
    return b;
}

}  // namespace

MacroField edie_field(const Dataset& dataset, const EdieOptions& options) {
    if (!(options.dx > 0.0) || !(options.dt > 0.0))
        throw DataError("grid bin sizes must be positive");

    GridBounds bounds{0.0, 0.0, 0.0, 0.0};
    const bool have_explicit = options.x_begin && options.x_end && options.t_begin &&
                               options.t_end;
    if (have_explicit) {
        bounds = {*options.x_begin, *options.x_end, *options.t_begin, *options.t_end};
    } else {
        bounds = data_bounds(dataset);
        if (options.x_begin) bounds.x0 = *options.x_begin;
        if (options.x_end) bounds.x1 = *options.x_end;
        if (options.t_begin) bounds.t0 = *options.t_begin;
        if (options.t_end) bounds.t1 = *options.t_end;
        if (!(bounds.x1 >= bounds.x0)) bounds = {0.0, options.dx, 0.0, options.dt};
    }

    MacroField field;
    field.x0 = bounds.x0;
    field.t0 = bounds.t0;
    field.dx = options.dx;
    field.dt = options.dt;
    field.nx = std::max(1, static_cast<int>(std::ceil((bounds.x1 - bounds.x0) / options.dx -
                                                      1e-9)));
    field.nt = std::max(1, static_cast<int>(std::ceil((bounds.t1 - bounds.t0) / options.dt -
                                                      1e-9)));
    field.direction = options.direction.value_or(0);
    field.lane = options.lane.value_or(0);
    field.dist = Eigen::ArrayXXd::Zero(field.nx, field.nt);
    field.time = Eigen::ArrayXXd::Zero(field.nx, field.nt);

    std::vector<double> cuts;
    for (const Trajectory& traj : dataset.trajectories) {
        if (options.direction && traj.direction != *options.direction) continue;
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            const double ta = traj.timestamps[i], tb = traj.timestamps[i + 1];
            const double xa = traj.x_positions[i], xb = traj.x_positions[i + 1];
            if (!(tb > ta)) continue;
            if (options.lane) {
                const double y_mid = 0.5 * (traj.y_positions[i] + traj.y_positions[i + 1]);
                if (lane_of(y_mid, traj.direction, options.lane_width_ft) != *options.lane)
                    continue;
            }

            // Split the segment at every bin boundary it crosses, in both
            // the time and space directions, then accumulate each piece
            // into the bin containing its midpoint.
            cuts.clear();
            cuts.push_back(0.0);
            cuts.push_back(1.0);
            const auto add_cuts = [&](double a, double b, double origin, double step) {
                if (a == b) return;
                const double lo = std::min(a, b), hi = std::max(a, b);
                double k = std::ceil((lo - origin) / step);
                for (; origin + k * step < hi; k += 1.0) {
                    const double boundary = origin + k * step;
                    if (boundary <= lo) continue;
                    cuts.push_back((boundary - a) / (b - a));
                }
            };
            add_cuts(ta, tb, field.t0, field.dt);
            add_cuts(xa, xb, field.x0, field.dx);
            std::sort(cuts.begin(), cuts.end());

            for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                const double s0 = cuts[c], s1 = cuts[c + 1];
                if (!(s1 > s0)) continue;
                const double sm = 0.5 * (s0 + s1);
                const double tm = ta + sm * (tb - ta);
                const double xm = xa + sm * (xb - xa);
                const int ix = static_cast<int>(std::floor((xm - field.x0) / field.dx));
                const int it = static_cast<int>(std::floor((tm - field.t0) / field.dt));
                if (!field.in_grid(ix, it)) continue;
                field.time(ix, it) += (s1 - s0) * (tb - ta);
                field.dist(ix, it) += (s1 - s0) * std::abs(xb - xa);
            }
        }
    }
    return field;
}

std::vector<FDPoint> fundamental_diagram_points(const MacroField& field,
                                                const FieldRegion& region) {
    const double field_x1 = field.x0 + field.dx * field.nx;
    const double field_t1 = field.t0 + field.dt * field.nt;
    if (region.x_begin < field.x0 - 1e-9 || region.x_end > field_x1 + 1e-9 ||
        region.t_begin < field.t0 - 1e-9 || region.t_end > field_t1 + 1e-9)
        throw DataError("fundamental-diagram region lies outside the field");

    std::vector<FDPoint> points;
    for (int ix = 0; ix < field.nx; ++ix) {
        const double xs = field.x0 + field.dx * ix;
        if (xs < region.x_begin || xs >= region.x_end) continue;
        for (int it = 0; it < field.nt; ++it) {
            const double ts = field.t0 + field.dt * it;
            if (ts < region.t_begin || ts >= region.t_end) continue;
            if (field.empty_bin(ix, it)) continue;
            FDPoint p;
            p.density_vpm = field.density(ix, it) * kFeetPerMile;
            p.flow_vph = field.flow(ix, it) * kSecondsPerHour;
            p.speed_mph = field.speed(ix, it) * kFtpsToMph;
            p.x_bin_start = xs;
            p.t_bin_start = ts;
            p.region = region.tag;
            points.push_back(std::move(p));
        }
    }
    return points;
}

std::string write_field_csv(const MacroField& field) {
    std::ostringstream out;
    out.precision(17);
    out << "# meta x0=" << field.x0 << " t0=" << field.t0 << " dx=" << field.dx
        << " dt=" << field.dt << " nx=" << field.nx << " nt=" << field.nt
        << " direction=" << field.direction << " lane=" << field.lane << "\n";
    out << "x_bin_start,t_bin_start,d_ft,t_s,v_ftps,q_vph,k_vpm\n";
    for (int ix = 0; ix < field.nx; ++ix) {
        for (int it = 0; it < field.nt; ++it) {
            out << (field.x0 + field.dx * ix) << "," << (field.t0 + field.dt * it) << ","
                << field.dist(ix, it) << "," << field.time(ix, it) << ",";
            if (!field.empty_bin(ix, it)) out << field.speed(ix, it);
            out << "," << field.flow(ix, it) * kSecondsPerHour << ","
                << field.density(ix, it) * kFeetPerMile << "\n";
        }
    }
    return out.str();
}

MacroField parse_field_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# meta", 0) != 0)
        throw DataError("field CSV missing '# meta' header line");

    MacroField field;
    {
        std::istringstream meta(line.substr(6));
        std::string token;
        while (meta >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = token.substr(0, eq);
            const double value = std::stod(token.substr(eq + 1));
            if (key == "x0") field.x0 = value;
            else if (key == "t0") field.t0 = value;
            else if (key == "dx") field.dx = value;
            else if (key == "dt") field.dt = value;
            else if (key == "nx") field.nx = static_cast<int>(value);
            else if (key == "nt") field.nt = static_cast<int>(value);
            else if (key == "direction") field.direction = static_cast<int>(value);
            else if (key == "lane") field.lane = static_cast<int>(value);
        }
    }
    if (field.nx <= 0 || field.nt <= 0) throw DataError("field CSV has empty grid");
    field.dist = Eigen::ArrayXXd::Zero(field.nx, field.nt);
    field.time = Eigen::ArrayXXd::Zero(field.nx, field.nt);

    if (!std::getline(in, line)) throw DataError("field CSV missing column header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double values[4] = {0, 0, 0, 0};
        for (int c = 0; c < 4; ++c) {
            if (!std::getline(row, cell, ',')) throw DataError("field CSV row too short");
            values[c] = std::stod(cell);
        }
        const int ix = static_cast<int>(std::llround((values[0] - field.x0) / field.dx));
        const int it = static_cast<int>(std::llround((values[1] - field.t0) / field.dt));
        if (!field.in_grid(ix, it)) throw DataError("field CSV row outside declared grid");
        field.dist(ix, it) = values[2];
        field.time(ix, it) = values[3];
    }
    return field;
}

MacroField read_field_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open field CSV: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_field_csv(buf.str());
}

}  // namespace trajlab
