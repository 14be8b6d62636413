#include "trajlab/spline.hpp"

#include <algorithm>
#include <cmath>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

// Nodal slopes from the interpolating parabola through three neighbors.
std::vector<double> nodal_slopes(const std::vector<double>& t,
                                 const std::vector<double>& v) {
    const std::size_t n = t.size();
    std::vector<double> d(n);
    if (n == 2) {
        d[0] = d[1] = (v[1] - v[0]) / (t[1] - t[0]);
        return d;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i == 0) ? 1 : (i == n - 1 ? n - 2 : i);
        const double t0 = t[j - 1], t1 = t[j], t2 = t[j + 1];
        const double s01 = (v[j] - v[j - 1]) / (t1 - t0);
        const double s12 = (v[j + 1] - v[j]) / (t2 - t1);
        const double c = (s12 - s01) / (t2 - t0);
        d[i] = s01 + c * ((t[i] - t0) + (t[i] - t1));
    }
    return d;
}

template <typename F>
double gauss7(const F& f, double a, double b) {
    static const double xs[7] = {-0.9491079123427585, -0.7415311855993945,
                                 -0.4058451513773972, 0.0,
                                 0.4058451513773972,  0.7415311855993945,
                                 0.9491079123427585};
    static const double ws[7] = {0.1294849661688697, 0.2797053914892767,
                                 0.3818300505051189, 0.4179591836734694,
                                 0.3818300505051189, 0.2797053914892767,
                                 0.1294849661688697};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double sum = 0.0;
    for (int k = 0; k < 7; ++k) sum += ws[k] * f(c + h * xs[k]);
    return sum * h;
}

// Adaptive Gauss quadrature by interval bisection.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double tol) {
    if (!(b > a)) return b == a ? 0.0 : -integrate_adaptive(f, b, a, tol);
    struct Span {
        double a, b;
    };
    double total = 0.0;
    std::vector<Span> stack{{a, b}};
    while (!stack.empty()) {
        const Span s = stack.back();
        stack.pop_back();
        const double whole = gauss7(f, s.a, s.b);
        const double mid = 0.5 * (s.a + s.b);
        const double halves = gauss7(f, s.a, mid) + gauss7(f, mid, s.b);
        if (std::abs(whole - halves) < tol || (s.b - s.a) < 1e-12)
            total += halves;
        else {
            stack.push_back({s.a, mid});
            stack.push_back({mid, s.b});
        }
    }
    return total;
}

}  // namespace

QuadraticSpline::QuadraticSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)) {
    if (knots_.size() < 2 || knots_.size() != values.size())
        throw DataError("spline needs >= 2 knots with matching values");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (!(knots_[i] > knots_[i - 1]))
            throw DataError("spline knots must be strictly increasing");

    const std::vector<double> d = nodal_slopes(knots_, values);
    const std::size_t n = knots_.size();
    breaks_.reserve(2 * (n - 1) + 1);
    coeff_.reserve(2 * (n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = knots_[i + 1] - knots_[i];
        const double v0 = values[i], v1 = values[i + 1];
        const double d0 = d[i], d1 = d[i + 1];
        // Each data interval is split at its midpoint into two quadratics
        // matching (value, slope) at both data knots and C1 at the split.
        const double cl = (2.0 * (v1 - v0) - h * (1.5 * d0 + 0.5 * d1)) / (h * h);
        const double half = 0.5 * h;
        const double vm = v0 + d0 * half + cl * half * half;
        const double dm = d0 + 2.0 * cl * half;
        const double cr = (d1 - dm) / h;
        breaks_.push_back(knots_[i]);
        coeff_.emplace_back(v0, d0, cl);
        breaks_.push_back(knots_[i] + half);
        coeff_.emplace_back(vm, dm, cr);
    }
    breaks_.push_back(knots_.back());
}

std::size_t QuadraticSpline::piece_index(double t) const {
    if (t <= breaks_.front()) return 0;
    if (t >= breaks_.back()) return coeff_.size() - 1;
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return static_cast<std::size_t>(it - breaks_.begin()) - 1;
}

double QuadraticSpline::operator()(double t) const {
    if (t < breaks_.front())
        return coeff_.front()[0] + coeff_.front()[1] * (t - breaks_.front());
    if (t > breaks_.back()) {
        const std::size_t last = coeff_.size() - 1;
        const double h = breaks_[last + 1] - breaks_[last];
        const double end_value =
            coeff_[last][0] + h * (coeff_[last][1] + h * coeff_[last][2]);
        const double end_slope = coeff_[last][1] + 2.0 * coeff_[last][2] * h;
        return end_value + end_slope * (t - breaks_.back());
    }
    const std::size_t i = piece_index(t);
    const double u = t - breaks_[i];
    return coeff_[i][0] + u * (coeff_[i][1] + u * coeff_[i][2]);
}

double QuadraticSpline::derivative(double t) const {
    if (t < breaks_.front()) return coeff_.front()[1];
    if (t > breaks_.back()) {
        const std::size_t last = coeff_.size() - 1;
        const double h = breaks_[last + 1] - breaks_[last];
        return coeff_[last][1] + 2.0 * coeff_[last][2] * h;
    }
    const std::size_t i = piece_index(t);
    return coeff_[i][1] + 2.0 * coeff_[i][2] * (t - breaks_[i]);
}

double QuadraticSpline::second_derivative(double t) const {
    if (t < breaks_.front() || t > breaks_.back()) return 0.0;
    return 2.0 * coeff_[piece_index(t)][2];
}

PlanarQuadraticSpline::PlanarQuadraticSpline(std::vector<double> knots,
                                             std::vector<double> x,
                                             std::vector<double> y)
    : x_(knots, std::move(x)), y_(knots, std::move(y)), knots_(std::move(knots)) {
    const auto sp = [this](double t) { return speed(t); };
    // Dense cumulative table (adaptive quadrature per slice once, at fit
    // time); queries then integrate only the short remainder of one slice.
    constexpr int kSlicesPerInterval = 32;
    table_t_.push_back(knots_.front());
    table_arc_.push_back(0.0);
    cumulative_.resize(knots_.size(), 0.0);
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        const double a = knots_[i - 1], b = knots_[i];
        for (int k = 1; k <= kSlicesPerInterval; ++k) {
            const double t0 = a + (b - a) * (k - 1) / kSlicesPerInterval;
            const double t1 = a + (b - a) * k / kSlicesPerInterval;
            table_arc_.push_back(table_arc_.back() +
                                 integrate_adaptive(sp, t0, t1, 1e-11));
            table_t_.push_back(t1);
        }
        cumulative_[i] = table_arc_.back();
    }
}

double PlanarQuadraticSpline::speed(double t) const {
    return std::hypot(x_.derivative(t), y_.derivative(t));
}

Eigen::Vector2d PlanarQuadraticSpline::point(double t) const { return {x_(t), y_(t)}; }

Eigen::Vector2d PlanarQuadraticSpline::tangent(double t) const {
    return {x_.derivative(t), y_.derivative(t)};
}

Eigen::Vector2d PlanarQuadraticSpline::unit_tangent(double t) const {
    Eigen::Vector2d v = tangent(t);
    const double n = v.norm();
    if (n == 0.0) throw ConvergenceError("degenerate spline tangent");
    return v / n;
}

double PlanarQuadraticSpline::curvature(double t) const {
    const double xd = x_.derivative(t), yd = y_.derivative(t);
    const double xdd = x_.second_derivative(t), ydd = y_.second_derivative(t);
    const double sp = std::hypot(xd, yd);
    return std::abs(xd * ydd - yd * xdd) / (sp * sp * sp);
}

double PlanarQuadraticSpline::arc_length(double t) const {
    const auto sp = [this](double u) { return speed(u); };
    if (t <= knots_.front()) return speed(knots_.front()) * (t - knots_.front());
    if (t >= knots_.back())
        return cumulative_.back() + speed(knots_.back()) * (t - knots_.back());
    const auto it = std::upper_bound(table_t_.begin(), table_t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - table_t_.begin()) - 1;
    // One quadrature panel over the short slice remainder; the integrand is
    // smooth so a single 7-point rule is already at machine precision here.
    return table_arc_[i] + gauss7(sp, table_t_[i], t);
}

double PlanarQuadraticSpline::parameter_at_arc_length(double s) const {
    if (s <= 0.0) return knots_.front() + s / speed(knots_.front());
    if (s >= table_arc_.back())
        return knots_.back() + (s - table_arc_.back()) / speed(knots_.back());
    const auto it = std::upper_bound(table_arc_.begin(), table_arc_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - table_arc_.begin()) - 1;
    double lo = table_t_[i], hi = table_t_[i + 1];
    double t = lo + (hi - lo) * (s - table_arc_[i]) /
                        std::max(table_arc_[i + 1] - table_arc_[i], 1e-300);
    for (int iter = 0; iter < 60; ++iter) {
        const double g = arc_length(t) - s;
        if (std::abs(g) < 1e-10) break;
        if (g > 0.0)
            hi = t;
        else
            lo = t;
        double next = t - g / std::max(speed(t), 1e-12);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
    }
    return t;
}

}  // namespace trajlab
