#include "trajlab/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

// True when every timestamp sits on the lattice t[0] + k/rate (gaps allowed).
// The tolerance accommodates double roundoff at unix-epoch magnitudes.
bool on_phase_lattice(const std::vector<double>& t, double rate_hz) {
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double steps = (t[i] - t.front()) * rate_hz;
        if (std::abs(steps - std::round(steps)) > 1e-4) return false;
    }
    return true;
}

double interp_at(const std::vector<double>& t, const std::vector<double>& v,
                 double query, std::size_t& hint) {
    while (hint + 2 < t.size() && t[hint + 1] <= query) ++hint;
    const double t0 = t[hint], t1 = t[hint + 1];
    const double u = (query - t0) / (t1 - t0);
    return v[hint] + u * (v[hint + 1] - v[hint]);
}

double snap_to_integer(double v) {
    const double r = std::round(v);
    if (std::abs(v - r) <= 8.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::abs(v)))
        return r;
    return v;
}

}  // namespace

Trajectory resample_trajectory(const Trajectory& trajectory, double rate_hz,
                               std::vector<GapSpan>* gaps) {
    if (!(rate_hz > 0.0)) throw DataError("resample rate must be positive");
    const std::vector<double>& t = trajectory.timestamps;
    if (t.size() < 2) throw DataError("resample needs at least 2 samples");
    if (trajectory.x_positions.size() != t.size() ||
        trajectory.y_positions.size() != t.size())
        throw DataError("resample: position arrays do not match timestamps");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw DataError("resample: timestamps must be strictly increasing");

    if (gaps) {
        for (std::size_t i = 1; i < t.size(); ++i)
            if (t[i] - t[i - 1] > kGapReportThreshold)
                gaps->push_back({t[i - 1], t[i]});
    }

    Trajectory out = trajectory;
    const double step = 1.0 / rate_hz;

    // Inputs already on a 1/rate lattice keep their own phase: released 25 Hz
    // data can sit a half step off the epoch lattice, and resampling must be
    // a no-op for it apart from gap filling. Sample values are preserved
    // bit-exactly; only missing lattice slots are interpolated.
    if (on_phase_lattice(t, rate_hz)) {
        const std::size_t k_max = static_cast<std::size_t>(
            std::llround((t.back() - t.front()) * rate_hz));
        out.timestamps.assign(k_max + 1, 0.0);
        out.x_positions.assign(k_max + 1, 0.0);
        out.y_positions.assign(k_max + 1, 0.0);
        std::size_t src = 0, hx = 0, hy = 0;
        for (std::size_t k = 0; k <= k_max; ++k) {
            const std::size_t k_src = static_cast<std::size_t>(
                std::llround((t[src] - t.front()) * rate_hz));
            if (k_src == k) {
                out.timestamps[k] = t[src];
                out.x_positions[k] = trajectory.x_positions[src];
                out.y_positions[k] = trajectory.y_positions[src];
                ++src;
            } else {
                const double tq = t.front() + static_cast<double>(k) * step;
                out.timestamps[k] = tq;
                out.x_positions[k] = interp_at(t, trajectory.x_positions, tq, hx);
                out.y_positions[k] = interp_at(t, trajectory.y_positions, tq, hy);
            }
        }
    } else {
        const long long k_first =
            static_cast<long long>(std::ceil(snap_to_integer(t.front() * rate_hz)));
        const long long k_last =
            static_cast<long long>(std::floor(snap_to_integer(t.back() * rate_hz)));
        if (k_last < k_first)
            throw DataError("resample: input span shorter than one grid step");

        const std::size_t n = static_cast<std::size_t>(k_last - k_first + 1);
        out.timestamps.resize(n);
        out.x_positions.resize(n);
        out.y_positions.resize(n);
        std::size_t hx = 0, hy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double tq =
                static_cast<double>(k_first + static_cast<long long>(i)) / rate_hz;
            out.timestamps[i] = tq;
            out.x_positions[i] = interp_at(t, trajectory.x_positions, tq, hx);
            out.y_positions[i] = interp_at(t, trajectory.y_positions, tq, hy);
        }
    }

    out.first_timestamp = out.timestamps.front();
    out.last_timestamp = out.timestamps.back();
    out.starting_x = out.x_positions.front();
    out.ending_x = out.x_positions.back();
    return out;
}

Dataset resample_dataset(const Dataset& dataset, double rate_hz,
                         std::vector<GapSpan>* gaps) {
    Dataset out;
    out.metadata = dataset.metadata;
    out.trajectories.reserve(dataset.trajectories.size());
    for (const Trajectory& traj : dataset.trajectories)
        out.trajectories.push_back(resample_trajectory(traj, rate_hz, gaps));
    return out;
}

std::vector<double> finite_difference_series(const std::vector<double>& x, double dt,
                                             int order) {
    if (order < 1 || order > 3) throw DataError("finite difference order must be 1..3");
    const std::size_t n = x.size();
    const std::size_t min_n = static_cast<std::size_t>(order) + 1;
    if (n < min_n) throw DataError("series too short for requested derivative order");
    std::vector<double> d(n, 0.0);

    if (order == 1) {
        d[0] = (x[1] - x[0]) / dt;
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
        d[n - 1] = (x[n - 1] - x[n - 2]) / dt;
    } else if (order == 2) {
        const double dt2 = dt * dt;
        for (std::size_t i = 1; i + 1 < n; ++i)
            d[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / dt2;
        d[0] = (x[2] - 2.0 * x[1] + x[0]) / dt2;
        d[n - 1] = (x[n - 1] - 2.0 * x[n - 2] + x[n - 3]) / dt2;
    } else {
        const double dt3 = dt * dt * dt;
        for (std::size_t i = 2; i + 2 < n; ++i)
            d[i] = (x[i + 2] - 2.0 * x[i + 1] + 2.0 * x[i - 1] - x[i - 2]) / (2.0 * dt3);
        const auto fwd = [&](std::size_t i) {
            return (x[i + 3] - 3.0 * x[i + 2] + 3.0 * x[i + 1] - x[i]) / dt3;
        };
        const auto bwd = [&](std::size_t i) {
            return (x[i] - 3.0 * x[i - 1] + 3.0 * x[i - 2] - x[i - 3]) / dt3;
        };
        d[0] = fwd(0);
        d[1] = fwd(1);
        d[n - 2] = bwd(n - 2);
        d[n - 1] = bwd(n - 1);
    }
    return d;
}

std::vector<double> finite_difference(const Trajectory& trajectory, int order) {
    const std::vector<double>& t = trajectory.timestamps;
    if (t.size() < 2) throw DataError("finite difference needs at least 2 samples");
    const double dt = t[1] - t[0];
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6)
            throw DataError("finite difference requires uniform sampling; resample first");
    return finite_difference_series(trajectory.x_positions, dt, order);
}

}  // namespace trajlab
