#pragma once

#include <vector>

#include <Eigen/Core>

namespace trajlab {

// C1 piecewise-quadratic interpolant through (t_i, v_i). Each data interval
// is split at its midpoint into two quadratic pieces so that nodal values
// and slopes are matched exactly; nodal slopes come from three-point
// finite differences (one-sided parabolic at the ends). Evaluation outside
// the knot range extrapolates linearly (zero second difference).
class QuadraticSpline {
public:
    QuadraticSpline() = default;
    QuadraticSpline(std::vector<double> knots, std::vector<double> values);

    double operator()(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;

    double t_min() const { return knots_.front(); }
    double t_max() const { return knots_.back(); }
    std::size_t piece_count() const { return coeff_.size(); }

private:
    std::size_t piece_index(double t) const;

    std::vector<double> knots_;   // data knots t_i
    std::vector<double> breaks_;  // piece breakpoints (knots + midpoints)
    // Per piece: value + b*(t-t0) + c*(t-t0)^2 with t0 = piece start.
    std::vector<Eigen::Vector3d> coeff_;
};

// Planar parametric curve (X(t), Y(t)) built from two quadratic splines on
// a shared knot vector, with arc-length bookkeeping.
class PlanarQuadraticSpline {
public:
    PlanarQuadraticSpline() = default;
    PlanarQuadraticSpline(std::vector<double> knots, std::vector<double> x,
                          std::vector<double> y);

    Eigen::Vector2d point(double t) const;
    Eigen::Vector2d tangent(double t) const;  // unnormalized dP/dt
    Eigen::Vector2d unit_tangent(double t) const;
    double curvature(double t) const;

    // Arc length from the first knot to parameter t (adaptive Gauss
    // quadrature, 1e-9 ft tolerance per segment).
    double arc_length(double t) const;
    double total_arc_length() const { return cumulative_.back(); }
    // Inverse of arc_length: the parameter at which the given arc length
    // from the first knot is reached.
    double parameter_at_arc_length(double s) const;

    double t_min() const { return x_.t_min(); }
    double t_max() const { return x_.t_max(); }

private:
    double speed(double t) const;

    QuadraticSpline x_, y_;
    std::vector<double> knots_;
    std::vector<double> cumulative_;  // arc length at each knot
    // Dense lookup table so arc-length queries stay cheap: parameters and
    // cumulative arc length sampled well inside every spline piece.
    std::vector<double> table_t_;
    std::vector<double> table_arc_;
};

}  // namespace trajlab
