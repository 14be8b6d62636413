#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trajlab/geometry.hpp"

namespace trajlab {

// Image pixel <-> state-plane correspondence. Ground correspondences have
// z = 0; elevated ones carry a known nonzero height.
struct Correspondence {
    Eigen::Vector2d image;       // (column, row)
    Eigen::Vector3d state;       // state-plane feet
};

// A manually annotated vertical line in the image (bottom and top pixel).
struct VerticalSegment {
    Eigen::Vector2d bottom;
    Eigen::Vector2d top;
};

struct Homography {
    Eigen::Matrix3d H;      // image -> state plane (ground)
    Eigen::Matrix3d H_inv;  // state plane (ground) -> image
    double residual_ft = 0.0;  // RMS reprojection error in state-plane feet
};

struct Projection {
    Eigen::Matrix<double, 3, 4> P;  // state plane 3D -> image
    Eigen::Vector2d vanishing_point;  // z axis, image coordinates
    double residual_px = 0.0;
};

struct CameraCalibration {
    Homography homography;
    Projection projection;
};

// Labeled 2D prism in image space: 4 bottom and 4 top pixels, paired by
// index in corner order bbl, bbr, fbl, fbr.
struct ImageBox2D {
    std::array<Eigen::Vector2d, 4> bottom;
    std::array<Eigen::Vector2d, 4> top;
};

// Fits the image->state-plane perspective transform by normalized DLT
// followed by Levenberg refinement of the squared reprojection error in
// state-plane units. Needs >= 4 non-degenerate ground correspondences.
Homography fit_homography(const std::vector<Correspondence>& correspondences);

// Maps one image pixel to the z = 0 state plane.
Eigen::Vector2d image_to_ground(const Eigen::Vector2d& pixel, const Homography& h);
// Maps one ground point into the image.
Eigen::Vector2d ground_to_image(const Eigen::Vector2d& ground, const Homography& h);

// Completes the 3x4 projection: columns 1, 2, 4 come from H_inv, the z
// vanishing point from the least-squares intersection of the vertical
// segments, and the remaining scale p33 from a scalar fit against the
// elevated correspondences.
Projection fit_projection(const Homography& homography,
                          const std::vector<VerticalSegment>& verticals,
                          const std::vector<Correspondence>& elevated);

// Projects all 8 corners; throws DomainError when any corner has
// non-positive projective depth.
std::array<Eigen::Vector2d, 8> project_box_to_image(const StatePlaneBox& box,
                                                    const Projection& projection);
Eigen::Vector2d project_point_to_image(const Eigen::Vector3d& point,
                                       const Projection& projection);

// Lifts the labeled footprint to the ground plane via H and recovers the
// box height by bisection on the reprojected image height, stopping when
// the reprojected top corners match the labels within tolerance_px RMS.
StatePlaneBox estimate_box_height(const ImageBox2D& box, const Homography& h,
                                  const Projection& p, double tolerance_px);

// Calibration JSON file: correspondences, verticals, fitted matrices.
struct CalibrationSpec {
    std::vector<Correspondence> ground;
    std::vector<VerticalSegment> verticals;
    std::vector<Correspondence> elevated;
};

CalibrationSpec parse_calibration_spec(const std::string& text);
CalibrationSpec read_calibration_file(const std::string& path);
std::string write_calibration(const CalibrationSpec& spec, const CameraCalibration& calib);

}  // namespace trajlab
