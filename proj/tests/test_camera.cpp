#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trajlab/camera.hpp"
#include "trajlab/errors.hpp"

using namespace trajlab;

namespace {

oracle::PinholeCamera make_camera() {
    return oracle::PinholeCamera({200.0, -250.0, 120.0}, {350.0, 0.0, 0.0}, 2200.0,
                                 {1920.0, 1080.0});
}

std::vector<Correspondence> ground_grid(const oracle::PinholeCamera& cam) {
    std::vector<Correspondence> cs;
    for (double x : {100.0, 250.0, 400.0, 550.0})
        for (double y : {-40.0, 10.0}) {
            Correspondence c;
            c.state = {x, y, 0.0};
            c.image = cam.project(c.state);
            cs.push_back(c);
        }
    return cs;
}

}  // namespace

TEST_CASE("fit_homography on identical image/state coordinates is identity") {
    std::vector<Correspondence> cs;
    for (double x : {0.0, 10.0, 0.0, 10.0, 5.0})
        cs.push_back({{x, x == 5.0 ? 5.0 : (x == 0.0 ? 0.0 : 10.0)},
                      {x, x == 5.0 ? 5.0 : (x == 0.0 ? 0.0 : 10.0), 0.0}});
    // four distinct corners plus center
    cs[1].image.y() = 0.0;
    cs[1].state.y() = 0.0;
    cs[2].image.y() = 10.0;
    cs[2].state.y() = 10.0;
    Homography h = fit_homography(cs);
    CHECK(h.residual_ft < 1e-9);
    const Eigen::Matrix3d norm = h.H / h.H(2, 2);
    CHECK((norm - Eigen::Matrix3d::Identity()).norm() < 1e-8);
}

TEST_CASE("fit_homography recovers an exact pinhole ground map") {
    const auto cam = make_camera();
    const auto cs = ground_grid(cam);
    REQUIRE(cs.size() == 8);
    Homography h = fit_homography(cs);
    CHECK(h.residual_ft < 1e-6);
    // forward-then-inverse returns originals
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(100.0, 550.0), uy(-40.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const Eigen::Vector2d g(ux(rng), uy(rng));
        const Eigen::Vector2d img = ground_to_image(g, h);
        const Eigen::Vector2d back = image_to_ground(img, h);
        CHECK((back - g).norm() < 1e-6);
    }
}

TEST_CASE("fit_homography error cases") {
    const auto cam = make_camera();
    SUBCASE("three points are underdetermined") {
        std::vector<Correspondence> cs = ground_grid(cam);
        cs.resize(3);
        CHECK_THROWS_AS(fit_homography(cs), DataError);
    }
    SUBCASE("collinear configuration is degenerate") {
        std::vector<Correspondence> cs;
        for (double x : {100.0, 200.0, 300.0, 400.0, 500.0}) {
            Correspondence c;
            c.state = {x, 0.0, 0.0};
            c.image = cam.project(c.state);
            cs.push_back(c);
        }
        CHECK_THROWS_AS(fit_homography(cs), DataError);
    }
}

TEST_CASE("fit_projection recovers the full camera") {
    const auto cam = make_camera();
    Homography h = fit_homography(ground_grid(cam));

    std::vector<VerticalSegment> verticals;
    for (double x : {150.0, 450.0}) {
        VerticalSegment seg;
        seg.bottom = cam.project({x, -15.0, 0.0});
        seg.top = cam.project({x, -15.0, 14.0});
        verticals.push_back(seg);
    }
    std::vector<Correspondence> elevated;
    for (double x : {120.0, 300.0, 500.0})
        for (double z : {4.0, 9.0}) {
            Correspondence c;
            c.state = {x, -20.0, z};
            c.image = cam.project(c.state);
            elevated.push_back(c);
        }

    Projection p = fit_projection(h, verticals, elevated);
    CHECK(p.residual_px < 0.5);

    SUBCASE("projected box corners match the oracle camera") {
        StatePlaneBox box;
        box.bbl = {300.0, -25.0, 0.0};
        box.bbr = {300.0, -19.0, 0.0};
        box.fbl = {316.0, -25.0, 0.0};
        box.fbr = {316.0, -19.0, 0.0};
        box.btl = box.bbl + Eigen::Vector3d(0, 0, 5.0);
        box.btr = box.bbr + Eigen::Vector3d(0, 0, 5.0);
        box.ftl = box.fbl + Eigen::Vector3d(0, 0, 5.0);
        box.ftr = box.fbr + Eigen::Vector3d(0, 0, 5.0);
        const auto px = project_box_to_image(box, p);
        const auto corners = box.corners();
        double rms = 0.0;
        for (int i = 0; i < 8; ++i) rms += (px[i] - cam.project(corners[i])).squaredNorm();
        rms = std::sqrt(rms / 8.0);
        CHECK(rms < 0.5);
    }
    SUBCASE("columns 1,2,4 of P equal H_inv up to a common scale") {
        Eigen::Matrix3d stripped;
        stripped.col(0) = p.P.col(0);
        stripped.col(1) = p.P.col(1);
        stripped.col(2) = p.P.col(3);
        const Eigen::Matrix3d lhs = stripped / stripped(2, 2);
        const Eigen::Matrix3d rhs = h.H_inv / h.H_inv(2, 2);
        CHECK((lhs - rhs).norm() < 1e-8 * rhs.norm());
    }
    SUBCASE("zero-height box collapses onto the ground homography") {
        const Eigen::Vector2d g(320.0, -22.0);
        const Eigen::Vector2d via_h = ground_to_image(g, h);
        const Eigen::Vector2d via_p =
            project_point_to_image({g.x(), g.y(), 0.0}, p);
        CHECK((via_h - via_p).norm() < 1e-8);
    }
}

TEST_CASE("fit_projection error cases") {
    const auto cam = make_camera();
    Homography h = fit_homography(ground_grid(cam));

    SUBCASE("parallel verticals are orthographic-degenerate") {
        std::vector<VerticalSegment> verticals;
        verticals.push_back({{100.0, 500.0}, {100.0, 400.0}});
        verticals.push_back({{300.0, 500.0}, {300.0, 400.0}});
        std::vector<Correspondence> elevated{{{0.0, 0.0}, {100.0, 0.0, 5.0}}};
        CHECK_THROWS_AS(fit_projection(h, verticals, elevated), DataError);
    }
    SUBCASE("all-ground correspondences leave the scale unconstrained") {
        std::vector<VerticalSegment> verticals;
        for (double x : {150.0, 450.0}) {
            VerticalSegment seg;
            seg.bottom = cam.project({x, -15.0, 0.0});
            seg.top = cam.project({x, -15.0, 14.0});
            verticals.push_back(seg);
        }
        std::vector<Correspondence> elevated{{{0.0, 0.0}, {100.0, 0.0, 0.0}}};
        CHECK_THROWS_AS(fit_projection(h, verticals, elevated), DataError);
    }
}

TEST_CASE("project_box_to_image matches the oracle bit-for-bit given the oracle P") {
    const auto cam = make_camera();
    Projection p;
    p.P = cam.matrix();
    p.vanishing_point = {0.0, 0.0};
    StatePlaneBox box;
    box.bbl = {250.0, -30.0, 0.0};
    box.bbr = {250.0, -24.0, 0.0};
    box.fbl = {266.0, -30.0, 0.0};
    box.fbr = {266.0, -24.0, 0.0};
    box.btl = box.bbl + Eigen::Vector3d(0, 0, 4.5);
    box.btr = box.bbr + Eigen::Vector3d(0, 0, 4.5);
    box.ftl = box.fbl + Eigen::Vector3d(0, 0, 4.5);
    box.ftr = box.fbr + Eigen::Vector3d(0, 0, 4.5);
    const auto px = project_box_to_image(box, p);
    const auto corners = box.corners();
    for (int i = 0; i < 8; ++i) CHECK((px[i] - cam.project(corners[i])).norm() < 1e-9);
}

TEST_CASE("behind-camera corner raises a domain error") {
    const auto cam = make_camera();
    Projection p;
    p.P = cam.matrix();
    CHECK_THROWS_AS(project_point_to_image({200.0, -250.0, 121.0}, p), DomainError);
}

TEST_CASE("estimate_box_height") {
    const auto cam = make_camera();
    Homography h = fit_homography(ground_grid(cam));
    std::vector<VerticalSegment> verticals;
    for (double x : {150.0, 450.0}) {
        VerticalSegment seg;
        seg.bottom = cam.project({x, -15.0, 0.0});
        seg.top = cam.project({x, -15.0, 14.0});
        verticals.push_back(seg);
    }
    std::vector<Correspondence> elevated;
    for (double x : {120.0, 300.0, 500.0}) {
        Correspondence c;
        c.state = {x, -20.0, 6.0};
        c.image = cam.project(c.state);
        elevated.push_back(c);
    }
    Projection p = fit_projection(h, verticals, elevated);

    const double planted = 4.7021;
    const auto make_image_box = [&](double height, double noise) {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> jitter(0.0, noise);
        ImageBox2D box;
        const std::array<Eigen::Vector3d, 4> bottoms = {
            Eigen::Vector3d{300.0, -25.0, 0.0}, Eigen::Vector3d{300.0, -19.0, 0.0},
            Eigen::Vector3d{316.0, -25.0, 0.0}, Eigen::Vector3d{316.0, -19.0, 0.0}};
        for (int i = 0; i < 4; ++i) {
            box.bottom[i] = cam.project(bottoms[i]);
            box.top[i] = cam.project(bottoms[i] + Eigen::Vector3d(0, 0, height));
            box.top[i] += Eigen::Vector2d(jitter(rng), jitter(rng));
        }
        return box;
    };

    SUBCASE("planted height recovered within 0.01 ft") {
        const StatePlaneBox fitted =
            estimate_box_height(make_image_box(planted, 0.0), h, p, 0.5);
        const double recovered = fitted.btl.z();
        CHECK(std::abs(recovered - planted) < 0.01);
    }
    SUBCASE("top equal to bottom gives zero height") {
        const StatePlaneBox fitted =
            estimate_box_height(make_image_box(0.0, 0.0), h, p, 0.5);
        CHECK(fitted.btl.z() == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("zero tolerance with noisy labels fails to converge") {
        try {
            estimate_box_height(make_image_box(planted, 2.0), h, p, 0.0);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            CHECK(e.best_residual > 0.0);
        }
    }
}
