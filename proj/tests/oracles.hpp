#pragma once

// Test-only reference implementations, independent of the library code
// paths they are used to check.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Synthetic pinhole camera looking at the ground plane from a pole-top
// vantage point. Provides exact projections for calibration fixtures.
class PinholeCamera {
public:
    PinholeCamera(const Eigen::Vector3d& position, const Eigen::Vector3d& look_at,
                  double focal_px, const Eigen::Vector2d& principal) {
        const Eigen::Vector3d forward = (look_at - position).normalized();
        const Eigen::Vector3d world_up(0.0, 0.0, 1.0);
        const Eigen::Vector3d right = forward.cross(world_up).normalized();
        const Eigen::Vector3d down = forward.cross(right).normalized();
        Eigen::Matrix3d rot;
        rot.row(0) = right;
        rot.row(1) = down;
        rot.row(2) = forward;
        Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
        k(0, 0) = k(1, 1) = focal_px;
        k(0, 2) = principal.x();
        k(1, 2) = principal.y();
        p_.leftCols<3>() = k * rot;
        p_.col(3) = -k * rot * position;
    }

    Eigen::Vector2d project(const Eigen::Vector3d& point) const {
        const Eigen::Vector3d q = p_ * Eigen::Vector4d(point.x(), point.y(), point.z(), 1.0);
        return {q.x() / q.z(), q.y() / q.z()};
    }

    const Eigen::Matrix<double, 3, 4>& matrix() const { return p_; }

    // Ground-plane homography (state -> image) is columns 0, 1, 3.
    Eigen::Matrix3d ground_to_image() const {
        Eigen::Matrix3d h;
        h.col(0) = p_.col(0);
        h.col(1) = p_.col(1);
        h.col(2) = p_.col(3);
        return h;
    }

private:
    Eigen::Matrix<double, 3, 4> p_;
};

// Enumerates every valid chain partition of fragments (indices ordered by
// start time) and returns the minimum achievable association cost.
// `edge_cost(a, b)` returns the finite cost of linking a -> b or NaN when
// the link is gated out.
struct PartitionEnumerator {
    std::size_t count = 0;
    double entry_cost = 0.0;
    double exit_cost = 0.0;
    std::vector<std::vector<double>> edges;  // NaN = forbidden

    double best_cost() const {
        std::vector<int> chain_tail;  // fragment index of each open chain tail
        double best = std::numeric_limits<double>::infinity();
        recurse(0, chain_tail, 0.0, best);
        return best;
    }

    // Partition cost = per chain: entry + sum(edges) + exit.
    void recurse(std::size_t next, std::vector<int>& tails, double cost,
                 double& best) const {
        if (next == count) {
            double total = cost + exit_cost * static_cast<double>(tails.size());
            best = std::min(best, total);
            return;
        }
        // start a new chain at `next`
        tails.push_back(static_cast<int>(next));
        recurse(next + 1, tails, cost + entry_cost, best);
        tails.pop_back();
        // or append to an existing chain tail
        for (std::size_t k = 0; k < tails.size(); ++k) {
            const double e = edges[static_cast<std::size_t>(tails[k])][next];
            if (std::isnan(e)) continue;
            const int saved = tails[k];
            tails[k] = static_cast<int>(next);
            recurse(next + 1, tails, cost + e, best);
            tails[k] = saved;
        }
    }
};

// Brute-force Edie accumulation for one sample pair onto a grid, splitting
// the segment by dense sub-sampling rather than exact clipping. With enough
// substeps the result converges to the exact clipped contribution.
struct DenseEdieOracle {
    double x0, t0, dx, dt;
    int nx, nt;
    std::vector<double> dist, time;

    DenseEdieOracle(double x0_, double t0_, double dx_, double dt_, int nx_, int nt_)
        : x0(x0_), t0(t0_), dx(dx_), dt(dt_), nx(nx_), nt(nt_),
          dist(static_cast<std::size_t>(nx_) * nt_, 0.0),
          time(static_cast<std::size_t>(nx_) * nt_, 0.0) {}

    void add_segment(double ta, double xa, double tb, double xb, int substeps = 20000) {
        const double dt_seg = (tb - ta) / substeps;
        for (int k = 0; k < substeps; ++k) {
            const double tm = ta + (k + 0.5) * dt_seg;
            const double xm = xa + (xb - xa) * (tm - ta) / (tb - ta);
            const int ix = static_cast<int>(std::floor((xm - x0) / dx));
            const int it = static_cast<int>(std::floor((tm - t0) / dt));
            if (ix < 0 || ix >= nx || it < 0 || it >= nt) continue;
            const std::size_t idx = static_cast<std::size_t>(ix) * nt + it;
            time[idx] += dt_seg;
            dist[idx] += std::abs(xb - xa) / substeps;
        }
    }
};

// Direct numerical CWT coefficient with oversampled quadrature: the
// integral of x(t) psi((t-b)/a) / sqrt(a) evaluated by fine Riemann sums
// over a linearly interpolated series.
inline double cwt_quadrature(const std::vector<double>& values, double t0, double dt,
                             double scale, double b, int oversample = 10) {
    const double fine = dt / oversample;
    const double t_end = t0 + dt * static_cast<double>(values.size() - 1);
    const double reach = 6.0 * scale;
    const double lo = std::max(t0, b - reach);
    const double hi = std::min(t_end, b + reach);
    double sum = 0.0;
    for (double t = lo; t < hi; t += fine) {
        const double tm = t + 0.5 * fine;
        if (tm > t_end) break;
        const double pos = (tm - t0) / dt;
        const std::size_t i = std::min(static_cast<std::size_t>(pos), values.size() - 2);
        const double u = pos - static_cast<double>(i);
        const double x = values[i] * (1.0 - u) + values[i + 1] * u;
        const double arg = (tm - b) / scale;
        sum += x * std::exp(-0.5 * arg * arg) * std::cos(5.0 * arg) * fine;
    }
    return sum / std::sqrt(scale);
}

}  // namespace oracle
