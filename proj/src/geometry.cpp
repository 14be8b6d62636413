#include "trajlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

constexpr double kMinControlSpacing = 200.0;  // ft
constexpr double kClosestPointWindow = 300.0;  // ft around the seed
constexpr double kClosestPointTol = 1e-6;      // ft

// Golden-section minimization of f over [lo, hi].
template <typename F>
double golden_minimize(const F& f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

RoadwayGeometry RoadwayGeometry::fit(const GeometrySpec& spec) {
    const auto& pts = spec.control_points;
    if (pts.size() < 3) throw DataError("centerline fit needs at least 3 control points");
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!(pts[i].x() > pts[i - 1].x()))
            throw DataError("centerline control points must be strictly monotone in "
                            "state-plane x");
        if ((pts[i] - pts[i - 1]).norm() < kMinControlSpacing)
            throw DataError("centerline control points closer than 200 ft");
    }
    if (spec.anchor_index >= pts.size())
        throw DataError("geometry anchor index out of range");

    RoadwayGeometry geom;
    geom.spec_ = spec;

    // Chord-length parameterization; roadway x is arc length along the
    // fitted curve, shifted so the anchor control point lands on anchor_x.
    std::vector<double> param(pts.size(), 0.0);
    std::vector<double> xs(pts.size()), ys(pts.size());
    xs[0] = pts[0].x();
    ys[0] = pts[0].y();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        param[i] = param[i - 1] + (pts[i] - pts[i - 1]).norm();
        xs[i] = pts[i].x();
        ys[i] = pts[i].y();
    }
    geom.centerline_ = PlanarQuadraticSpline(param, xs, ys);

    const double anchor_arc = geom.centerline_.arc_length(param[spec.anchor_index]);
    geom.anchor_offset_ = spec.anchor_x - anchor_arc;
    geom.road_min_ = geom.anchor_offset_;
    geom.road_max_ = geom.anchor_offset_ + geom.centerline_.total_arc_length();

    // Inverse-guess spline on sampled (x_state, x_road) pairs.
    const int samples = std::max<int>(64, static_cast<int>(pts.size()) * 8);
    std::vector<double> gx(samples), gv(samples);
    for (int i = 0; i < samples; ++i) {
        const double s = geom.centerline_.total_arc_length() *
                         static_cast<double>(i) / (samples - 1);
        const double t = geom.centerline_.parameter_at_arc_length(s);
        gx[i] = geom.centerline_.point(t).x();
        gv[i] = s + geom.anchor_offset_;
    }
    for (int i = 1; i < samples; ++i)
        if (!(gx[i] > gx[i - 1]))
            throw DataError("centerline state-plane x not strictly monotone along "
                            "the fitted curve");
    geom.inverse_ = QuadraticSpline(gx, gv);
    return geom;
}

double RoadwayGeometry::parameter_for(double x_road) const {
    return centerline_.parameter_at_arc_length(x_road - anchor_offset_);
}

Eigen::Vector2d RoadwayGeometry::centerline(double x_road) const {
    return centerline_.point(parameter_for(x_road));
}

Eigen::Vector2d RoadwayGeometry::unit_tangent(double x_road) const {
    return centerline_.unit_tangent(parameter_for(x_road));
}

Eigen::Vector2d RoadwayGeometry::unit_perpendicular(double x_road) const {
    const Eigen::Vector2d t = unit_tangent(x_road);
    // Rotate toward the eastbound side per the fitted orientation flag.
    return spec_.eastbound_left ? Eigen::Vector2d(-t.y(), t.x())
                                : Eigen::Vector2d(t.y(), -t.x());
}

double RoadwayGeometry::curvature(double x_road) const {
    return centerline_.curvature(parameter_for(x_road));
}

double RoadwayGeometry::inverse_guess(double x_state) const { return inverse_(x_state); }

StatePlaneBox roadway_to_stateplane(const RoadwayBox& box, const RoadwayGeometry& geom) {
    if (box.x < geom.x_road_min() - 1e-9 || box.x > geom.x_road_max() + 1e-9)
        throw DomainError("roadway x outside fitted geometry extent");
    const double kappa = geom.curvature(box.x);
    if (kappa > 0.0 && std::abs(box.y) * kappa >= 1.0)
        throw DomainError("lateral offset reaches the local radius of curvature");

    const Eigen::Vector2d spl = geom.centerline(box.x);
    const Eigen::Vector2d u_f = geom.unit_tangent(box.x);
    const Eigen::Vector2d u_p = geom.unit_perpendicular(box.x);
    const Eigen::Vector2d center = spl + box.y * u_p;

    const double dir = static_cast<double>(box.effective_direction());
    const Eigen::Vector2d fwd = dir * box.length * u_f;
    const Eigen::Vector2d half_l = -dir * 0.5 * box.width * u_p;  // driver's left
    const Eigen::Vector2d half_r = -half_l;

    const auto corner = [&](const Eigen::Vector2d& base, double z) {
        return Eigen::Vector3d(base.x(), base.y(), z);
    };
    StatePlaneBox out;
    out.bbl = corner(center + half_l, 0.0);
    out.bbr = corner(center + half_r, 0.0);
    out.btl = corner(center + half_l, box.height);
    out.btr = corner(center + half_r, box.height);
    out.fbl = corner(center + half_l + fwd, 0.0);
    out.fbr = corner(center + half_r + fwd, 0.0);
    out.ftl = corner(center + half_l + fwd, box.height);
    out.ftr = corner(center + half_r + fwd, box.height);
    return out;
}

RoadwayBox stateplane_to_roadway(const StatePlaneBox& box, const RoadwayGeometry& geom) {
    const auto dist3 = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
        return (a - b).norm();
    };
    RoadwayBox out;
    out.length = 0.25 * (dist3(box.fbl, box.bbl) + dist3(box.fbr, box.bbr) +
                         dist3(box.ftl, box.btl) + dist3(box.ftr, box.btr));
    out.width = 0.25 * (dist3(box.bbr, box.bbl) + dist3(box.btr, box.btl) +
                        dist3(box.fbr, box.fbl) + dist3(box.ftr, box.ftl));
    out.height = 0.25 * ((box.btl.z() - box.bbl.z()) + (box.btr.z() - box.bbr.z()) +
                         (box.ftl.z() - box.fbl.z()) + (box.ftr.z() - box.fbr.z()));

    const Eigen::Vector3d c3 = box.back_center();
    const Eigen::Vector2d target(c3.x(), c3.y());

    const auto sqdist = [&](double xr) {
        return (geom.centerline(xr) - target).squaredNorm();
    };

    const double seed = geom.inverse_guess(target.x());
    const double edge_margin = 10.0 * kClosestPointTol;
    double window = kClosestPointWindow;
    double xr = 0.0;
    for (;;) {
        const double lo = std::max(seed - window, geom.x_road_min());
        const double hi = std::min(seed + window, geom.x_road_max());
        if (!(hi > lo))
            throw DomainError("point projects beyond the fitted centerline extent");
        xr = golden_minimize(sqdist, lo, hi, kClosestPointTol);
        // Newton polish on the stationarity condition (F(x) - p) . F'(x) = 0
        // brings the golden-section estimate down to machine precision.
        for (int iter = 0; iter < 12; ++iter) {
            const double step = 1e-3;
            const auto g = [&](double x) {
                return (geom.centerline(x) - target).dot(geom.unit_tangent(x));
            };
            const double g0 = g(xr);
            const double gp = (g(xr + step) - g(xr - step)) / (2.0 * step);
            if (!(std::abs(gp) > 1e-12)) break;
            const double next = xr - g0 / gp;
            if (!(next > lo && next < hi)) break;
            if (std::abs(next - xr) < 1e-12 * std::max(1.0, std::abs(xr))) {
                xr = next;
                break;
            }
            xr = next;
        }
        const bool at_lo = xr - lo < edge_margin;
        const bool at_hi = hi - xr < edge_margin;
        if (!at_lo && !at_hi) break;
        if ((at_lo && lo <= geom.x_road_min() + edge_margin) ||
            (at_hi && hi >= geom.x_road_max() - edge_margin))
            throw DomainError("point projects beyond the fitted centerline extent");
        window *= 2.0;  // seed window too tight, widen and retry
    }

    const Eigen::Vector2d foot = geom.centerline(xr);
    const Eigen::Vector2d u_p = geom.unit_perpendicular(xr);
    const Eigen::Vector2d offset = target - foot;
    out.x = xr;
    out.y = offset.norm() * (offset.dot(u_p) >= 0.0 ? 1.0 : -1.0);
    out.direction = out.y >= 0.0 ? 1 : -1;
    return out;
}

GeometrySpec parse_geometry_spec(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    GeometrySpec spec;
    if (!doc.contains("control_points") || !doc["control_points"].is_array())
        throw SchemaError("geometry file missing 'control_points' array",
                          "control_points", -1);
    for (const auto& p : doc["control_points"]) {
        if (!p.is_array() || p.size() != 2)
            throw SchemaError("control point must be [x, y]", "control_points", -1);
        spec.control_points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    if (doc.contains("anchor")) {
        spec.anchor_index = doc["anchor"].value("index", 0u);
        spec.anchor_x = doc["anchor"].value("x_road", 0.0);
    }
    spec.eastbound_left = doc.value("eastbound_left", false);
    return spec;
}

GeometrySpec read_geometry_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open geometry file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_geometry_spec(buf.str());
}

std::string write_geometry_spec(const GeometrySpec& spec) {
    nlohmann::ordered_json doc;
    auto points = nlohmann::ordered_json::array();
    for (const auto& p : spec.control_points) points.push_back({p.x(), p.y()});
    doc["control_points"] = points;
    doc["anchor"] = {{"index", spec.anchor_index}, {"x_road", spec.anchor_x}};
    doc["eastbound_left"] = spec.eastbound_left;
    return doc.dump(2) + "\n";
}

}  // namespace trajlab
