#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trajlab/spline.hpp"

namespace trajlab {

// Box in curvilinear roadway coordinates: (x, y) locate the back-bottom
//-center footprint point, dimensions in feet. Direction is the sign of y
// unless set explicitly (westbound -1, eastbound +1).
struct RoadwayBox {
    double x = 0.0;
    double y = 0.0;
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;
    int direction = 0;  // 0 -> derive from sign(y)

    int effective_direction() const { return direction != 0 ? direction : (y >= 0.0 ? 1 : -1); }
};

// Eight named corners of a rectangular prism in state-plane feet
// (z up from the roadway plane). Order: back/front x bottom/top x left/right.
struct StatePlaneBox {
    Eigen::Vector3d bbl, bbr, btl, btr, fbl, fbr, ftl, ftr;

    std::array<Eigen::Vector3d, 8> corners() const {
        return {bbl, bbr, btl, btr, fbl, fbr, ftl, ftr};
    }
    // Back-bottom-center reference point: mean x,y of the 4 back corners.
    Eigen::Vector3d back_center() const {
        Eigen::Vector3d c = 0.25 * (bbl + bbr + btl + btr);
        c.z() = 0.0;
        return c;
    }
};

// Control-point description read from / written to geometry JSON files.
struct GeometrySpec {
    std::vector<Eigen::Vector2d> control_points;  // state plane feet
    std::size_t anchor_index = 0;                 // control point pinned to anchor_x
    double anchor_x = 0.0;                        // roadway coordinate at the anchor
    bool eastbound_left = false;  // eastbound side on the left of increasing-x travel
};

// The fitted coordinate-system authority: centerline spline F (roadway
// longitudinal coordinate -> state plane), its approximate inverse G for
// initial guesses, and the oriented perpendicular frame.
class RoadwayGeometry {
public:
    static RoadwayGeometry fit(const GeometrySpec& spec);

    // Centerline point / frame at roadway coordinate x (feet of arc length).
    Eigen::Vector2d centerline(double x_road) const;
    Eigen::Vector2d unit_tangent(double x_road) const;
    // Unit perpendicular oriented toward positive roadway y (eastbound side).
    Eigen::Vector2d unit_perpendicular(double x_road) const;
    double curvature(double x_road) const;

    // Initial-guess roadway coordinate for a state-plane x value.
    double inverse_guess(double x_state) const;

    double x_road_min() const { return road_min_; }
    double x_road_max() const { return road_max_; }

    const GeometrySpec& spec() const { return spec_; }

private:
    friend RoadwayBox stateplane_to_roadway(const StatePlaneBox&, const RoadwayGeometry&);
    friend StatePlaneBox roadway_to_stateplane(const RoadwayBox&, const RoadwayGeometry&);

    double parameter_for(double x_road) const;  // arc length -> spline parameter

    GeometrySpec spec_;
    PlanarQuadraticSpline centerline_;
    QuadraticSpline inverse_;  // x_state -> x_road seed
    double road_min_ = 0.0, road_max_ = 0.0;
    double anchor_offset_ = 0.0;  // x_road = arc_length + anchor_offset
};

// Places a roadway-coordinate box into state-plane coordinates:
// back center = F(x) + y * u_perp, left/right at +-w/2 along u_perp, front
// corners offset by length along the travel direction, top corners at z = h.
StatePlaneBox roadway_to_stateplane(const RoadwayBox& box, const RoadwayGeometry& geometry);

// Recovers roadway coordinates from a state-plane prism: dimensions from
// mean corner separations, x from the closest point on the centerline
// (seeded by the inverse spline, refined to 1e-6 ft), y as the signed
// perpendicular distance (positive on the eastbound side).
RoadwayBox stateplane_to_roadway(const StatePlaneBox& box, const RoadwayGeometry& geometry);

// Geometry JSON file round trip.
GeometrySpec parse_geometry_spec(const std::string& text);
GeometrySpec read_geometry_file(const std::string& path);
std::string write_geometry_spec(const GeometrySpec& spec);

}  // namespace trajlab
