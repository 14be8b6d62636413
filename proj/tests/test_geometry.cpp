#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trajlab/errors.hpp"
#include "trajlab/geometry.hpp"

using namespace trajlab;

namespace {

GeometrySpec straight_spec(double y_offset = 0.0, std::size_t count = 6) {
    GeometrySpec spec;
    for (std::size_t i = 0; i < count; ++i)
        spec.control_points.emplace_back(250.0 * static_cast<double>(i), y_offset);
    spec.anchor_index = 0;
    spec.anchor_x = 0.0;
    spec.eastbound_left = true;  // +y state-plane side is eastbound
    return spec;
}

// Shallow circular arc of radius R, monotone in state-plane x.
GeometrySpec arc_spec(double radius, double arc_step = 250.0, int count = 24) {
    GeometrySpec spec;
    const double half = arc_step * (count - 1) / 2.0;
    for (int i = 0; i < count; ++i) {
        const double theta = (-half + arc_step * i) / radius;
        spec.control_points.emplace_back(radius * std::sin(theta),
                                         radius * (1.0 - std::cos(theta)));
    }
    spec.anchor_index = 0;
    spec.anchor_x = 0.0;
    spec.eastbound_left = true;
    return spec;
}

}  // namespace

TEST_CASE("fit_centerline on collinear points is the identity line") {
    GeometrySpec spec = straight_spec();
    spec.anchor_index = 0;
    spec.anchor_x = 1000.0;  // F(x) = (x - 1000, 0)
    RoadwayGeometry geom = RoadwayGeometry::fit(spec);
    for (double xr : {1000.0, 1100.0, 1333.7, 2250.0}) {
        const Eigen::Vector2d p = geom.centerline(xr);
        CHECK(p.x() == doctest::Approx(xr - 1000.0).epsilon(1e-12));
        CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-12));
        const Eigen::Vector2d t = geom.unit_tangent(xr);
        CHECK(t.x() == doctest::Approx(1.0));
        CHECK(t.y() == doctest::Approx(0.0));
    }
}

TEST_CASE("anchored control point lands exactly on its roadway coordinate") {
    GeometrySpec spec = arc_spec(8000.0);
    spec.anchor_index = 5;
    spec.anchor_x = 316800.0;
    RoadwayGeometry geom = RoadwayGeometry::fit(spec);
    const Eigen::Vector2d p = geom.centerline(316800.0);
    CHECK((p - spec.control_points[5]).norm() < 1e-7);
}

TEST_CASE("fitted arc reproduces circle curvature within 2 percent at midpoints") {
    const double radius = 5000.0;
    GeometrySpec spec = arc_spec(radius);
    RoadwayGeometry geom = RoadwayGeometry::fit(spec);
    // |F''| measured with a symmetric second difference in arc length,
    // evaluated at the midpoints between control points.
    const double delta = 10.0;
    const double lo = geom.x_road_min(), hi = geom.x_road_max();
    for (int i = 0; i + 1 < 24; ++i) {
        const double mid = lo + 250.0 * (static_cast<double>(i) + 0.5);
        if (mid - delta < lo || mid + delta > hi) continue;
        const Eigen::Vector2d second =
            (geom.centerline(mid - delta) - 2.0 * geom.centerline(mid) +
             geom.centerline(mid + delta)) /
            (delta * delta);
        CHECK(second.norm() == doctest::Approx(1.0 / radius).epsilon(0.02));
    }
}

TEST_CASE("roadway_to_stateplane") {
    RoadwayGeometry geom = RoadwayGeometry::fit(straight_spec());

    SUBCASE("degenerate box collapses to the offset point") {
        RoadwayBox box{100.0, 5.0, 0.0, 0.0, 0.0, 0};
        StatePlaneBox sp = roadway_to_stateplane(box, geom);
        for (const auto& c : sp.corners()) {
            CHECK(c.x() == doctest::Approx(100.0).epsilon(1e-12));
            CHECK(c.y() == doctest::Approx(5.0).epsilon(1e-12));
            CHECK(c.z() == doctest::Approx(0.0));
        }
    }
    SUBCASE("eastbound front-top-left corner") {
        RoadwayBox box{100.0, 5.0, 15.0, 6.0, 5.0, 0};
        StatePlaneBox sp = roadway_to_stateplane(box, geom);
        CHECK(sp.ftl.x() == doctest::Approx(115.0));
        CHECK(sp.ftl.y() == doctest::Approx(2.0));
        CHECK(sp.ftl.z() == doctest::Approx(5.0));
    }
    SUBCASE("centerline point maps to F(x) exactly") {
        RoadwayBox box{400.0, 0.0, 0.0, 0.0, 0.0, 1};
        StatePlaneBox sp = roadway_to_stateplane(box, geom);
        const Eigen::Vector3d c = sp.back_center();
        CHECK(c.x() == doctest::Approx(400.0).epsilon(1e-12));
        CHECK(c.y() == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("out-of-range x is rejected") {
        RoadwayBox box{1e6, 0.0, 1.0, 1.0, 1.0, 1};
        CHECK_THROWS_AS(roadway_to_stateplane(box, geom), DomainError);
    }
    SUBCASE("lateral offset beyond the curvature radius is rejected") {
        RoadwayGeometry curved = RoadwayGeometry::fit(arc_spec(3000.0));
        RoadwayBox box{curved.x_road_min() + 2000.0, 3200.0, 0.0, 0.0, 0.0, 1};
        CHECK_THROWS_AS(roadway_to_stateplane(box, curved), DomainError);
    }
}

TEST_CASE("roadway round trip") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    SUBCASE("straight geometry recovers to 1e-9 ft") {
        RoadwayGeometry geom = RoadwayGeometry::fit(straight_spec());
        for (int k = 0; k < 500; ++k) {
            RoadwayBox box;
            box.x = 50.0 + 1100.0 * u01(rng);
            box.y = -60.0 + 120.0 * u01(rng);
            box.length = 20.0 * u01(rng);
            box.width = 8.0 * u01(rng);
            box.height = 10.0 * u01(rng);
            box.direction = box.y >= 0.0 ? 1 : -1;
            RoadwayBox back = stateplane_to_roadway(roadway_to_stateplane(box, geom), geom);
            CHECK(std::abs(back.x - box.x) < 1e-9);
            CHECK(std::abs(back.y - box.y) < 1e-9);
            CHECK(std::abs(back.length - box.length) < 1e-9);
            CHECK(std::abs(back.width - box.width) < 1e-9);
            CHECK(std::abs(back.height - box.height) < 1e-9);
        }
    }
    SUBCASE("curved geometry (R = 5000) recovers to 1e-3 ft") {
        RoadwayGeometry geom = RoadwayGeometry::fit(arc_spec(5000.0));
        const double lo = geom.x_road_min() + 100.0;
        const double hi = geom.x_road_max() - 100.0;
        for (int k = 0; k < 500; ++k) {
            RoadwayBox box;
            box.x = lo + (hi - lo) * u01(rng);
            box.y = -60.0 + 120.0 * u01(rng);
            box.length = 20.0 * u01(rng);
            box.width = 8.0 * u01(rng);
            box.height = 10.0 * u01(rng);
            box.direction = box.y >= 0.0 ? 1 : -1;
            RoadwayBox back = stateplane_to_roadway(roadway_to_stateplane(box, geom), geom);
            CHECK(std::abs(back.x - box.x) < 1e-3);
            CHECK(std::abs(back.y - box.y) < 1e-3);
        }
    }
    SUBCASE("eastbound-side point gets positive lateral coordinate") {
        RoadwayGeometry geom = RoadwayGeometry::fit(arc_spec(5000.0));
        RoadwayBox box{geom.x_road_min() + 1500.0, 18.0, 0.0, 0.0, 0.0, 1};
        StatePlaneBox sp = roadway_to_stateplane(box, geom);
        CHECK(stateplane_to_roadway(sp, geom).y > 0.0);
    }
}

TEST_CASE("perpendicular frame is orthonormal with constant orientation") {
    RoadwayGeometry geom = RoadwayGeometry::fit(arc_spec(4000.0));
    double first_cross = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double xr = geom.x_road_min() +
                          (geom.x_road_max() - geom.x_road_min()) * i / 200.0;
        const Eigen::Vector2d t = geom.unit_tangent(xr);
        const Eigen::Vector2d p = geom.unit_perpendicular(xr);
        CHECK(std::abs(t.dot(p)) < 1e-12);
        CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
        const double cross = t.x() * p.y() - t.y() * p.x();
        if (i == 0) first_cross = cross;
        CHECK(cross * first_cross > 0.0);
    }
}

TEST_CASE("analytic circle: roadway path length understates by R/(R+y)") {
    // On an exact circular centerline of radius R, a path at constant offset
    // y sweeping angle dtheta has true length (R+y)*dtheta while the roadway
    // x-coordinate advances R*dtheta.
    const double radius = 5000.0;
    for (double y : {-30.0, -12.0, 6.0, 24.0}) {
        const double dtheta = 0.05;
        const double roadway_length = radius * dtheta;
        const double true_length = (radius + y) * dtheta;
        CHECK(roadway_length / true_length ==
              doctest::Approx(radius / (radius + y)).epsilon(1e-9));
    }
    // The fitted spline geometry reproduces the same ratio to spline accuracy.
    RoadwayGeometry geom = RoadwayGeometry::fit(arc_spec(radius));
    const double y = 24.0;  // outside of the curve (+y side here)
    const double x0 = geom.x_road_min() + 1000.0;
    const double x1 = geom.x_road_max() - 1000.0;
    RoadwayBox a{x0, y, 0.0, 0.0, 0.0, 1};
    RoadwayBox b{x1, y, 0.0, 0.0, 0.0, 1};
    const Eigen::Vector3d pa = roadway_to_stateplane(a, geom).back_center();
    const Eigen::Vector3d pb = roadway_to_stateplane(b, geom).back_center();
    const double theta_a = std::atan2(pa.x(), radius - pa.y());
    const double theta_b = std::atan2(pb.x(), radius - pb.y());
    const double true_length = (radius + y) * (theta_b - theta_a);
    CHECK((x1 - x0) / true_length ==
          doctest::Approx(radius / (radius + y)).epsilon(1e-4));
}

TEST_CASE("fit_centerline input validation") {
    GeometrySpec two;
    two.control_points = {{0.0, 0.0}, {300.0, 0.0}};
    CHECK_THROWS_AS(RoadwayGeometry::fit(two), DataError);

    GeometrySpec nonmono;
    nonmono.control_points = {{0.0, 0.0}, {300.0, 0.0}, {250.0, 10.0}};
    CHECK_THROWS_AS(RoadwayGeometry::fit(nonmono), DataError);

    GeometrySpec tight;
    tight.control_points = {{0.0, 0.0}, {100.0, 0.0}, {400.0, 0.0}};
    CHECK_THROWS_AS(RoadwayGeometry::fit(tight), DataError);
}

TEST_CASE("beyond-spline-ends point is a range error") {
    RoadwayGeometry geom = RoadwayGeometry::fit(straight_spec());
    StatePlaneBox box;
    const Eigen::Vector3d p(5000.0, 3.0, 0.0);  // far past the last control point
    box.bbl = box.bbr = box.btl = box.btr = box.fbl = box.fbr = box.ftl = box.ftr = p;
    CHECK_THROWS_AS(stateplane_to_roadway(box, geom), DomainError);
}

TEST_CASE("pole landmark fixture produces a usable corridor geometry") {
    std::ifstream in(std::string(TRAJLAB_DATA_DIR) + "/pole_locations.json");
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc = nlohmann::json::parse(buf.str());

    // Constant equirectangular projection to local planar feet (test-only).
    const double lat0 = 36.03, lon0 = -86.65;
    const double earth_ft = 20925525.0;
    const double deg = M_PI / 180.0;
    GeometrySpec spec;
    for (const auto& pole : doc["poles"]) {
        const double lon = pole["longitude"].get<double>();
        const double lat = pole["latitude"].get<double>();
        spec.control_points.emplace_back(
            (lon - lon0) * deg * std::cos(lat0 * deg) * earth_ft,
            (lat - lat0) * deg * earth_ft);
    }
    REQUIRE(spec.control_points.size() == 40);
    spec.anchor_index = 20;
    spec.anchor_x = 316800.0;
    spec.eastbound_left = false;

    RoadwayGeometry geom = RoadwayGeometry::fit(spec);
    // Corridor length is a bit over 4 miles.
    const double extent = geom.x_road_max() - geom.x_road_min();
    CHECK(extent > 3.5 * 5280.0);
    CHECK(extent < 5.0 * 5280.0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        RoadwayBox box;
        box.x = geom.x_road_min() + 200.0 + (extent - 400.0) * u01(rng);
        box.y = -60.0 + 120.0 * u01(rng);
        box.length = 16.0;
        box.width = 6.0;
        box.height = 5.0;
        box.direction = box.y >= 0.0 ? 1 : -1;
        RoadwayBox back = stateplane_to_roadway(roadway_to_stateplane(box, geom), geom);
        CHECK(std::abs(back.x - box.x) < 1e-3);
        CHECK(std::abs(back.y - box.y) < 1e-3);
    }
}

TEST_CASE("geometry spec JSON round trip") {
    GeometrySpec spec = arc_spec(6000.0);
    spec.anchor_index = 3;
    spec.anchor_x = 316800.0;
    GeometrySpec back = parse_geometry_spec(write_geometry_spec(spec));
    REQUIRE(back.control_points.size() == spec.control_points.size());
    for (std::size_t i = 0; i < spec.control_points.size(); ++i)
        CHECK((back.control_points[i] - spec.control_points[i]).norm() == 0.0);
    CHECK(back.anchor_index == spec.anchor_index);
    CHECK(back.anchor_x == spec.anchor_x);
    CHECK(back.eastbound_left == spec.eastbound_left);
}
