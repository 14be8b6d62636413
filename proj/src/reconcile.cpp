#include "trajlab/reconcile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

// K = w1 I + w2 D2^T D2 + w3 D3^T D3 with physical-unit stencils.
Eigen::SparseMatrix<double> normal_matrix(std::size_t n, double dt,
                                          const ReconciliationWeights& w) {
    const double c2 = w.accel / std::pow(dt, 4);
    const double c3 = w.jerk / std::pow(dt, 6);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(7 * n);
    for (std::size_t i = 0; i < n; ++i)
        triplets.emplace_back(i, i, w.perturbation);
    if (n >= 3) {
        static const double s2[3] = {1.0, -2.0, 1.0};
        for (std::size_t r = 0; r + 2 < n; ++r)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    triplets.emplace_back(r + a, r + b, c2 * s2[a] * s2[b]);
    }
    if (n >= 4) {
        static const double s3[4] = {-1.0, 3.0, -3.0, 1.0};
        for (std::size_t r = 0; r + 3 < n; ++r)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    triplets.emplace_back(r + a, r + b, c3 * s3[a] * s3[b]);
    }
    Eigen::SparseMatrix<double> k(n, n);
    k.setFromTriplets(triplets.begin(), triplets.end());
    return k;
}

}  // namespace

double reconciliation_objective(const std::vector<double>& candidate,
                                const std::vector<double>& observed, double dt,
                                const ReconciliationWeights& w) {
    if (candidate.size() != observed.size())
        throw DataError("objective needs matching series lengths");
    const std::size_t n = candidate.size();
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = candidate[i] - observed[i];
        value += w.perturbation * r * r;
    }
    const double dt2 = dt * dt, dt3 = dt2 * dt;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        const double d2 = (candidate[i + 2] - 2.0 * candidate[i + 1] + candidate[i]) / dt2;
        value += w.accel * d2 * d2;
    }
    for (std::size_t i = 0; i + 3 < n; ++i) {
        const double d3 = (candidate[i + 3] - 3.0 * candidate[i + 2] +
                           3.0 * candidate[i + 1] - candidate[i]) /
                          dt3;
        value += w.jerk * d3 * d3;
    }
    return value;
}

std::vector<double> reconcile_series(const std::vector<double>& observed, double dt,
                                     const ReconciliationWeights& weights) {
    if (!(weights.perturbation > 0.0))
        throw DataError("zero perturbation weight makes reconciliation ill-posed");
    if (!(weights.accel >= 0.0) || !(weights.jerk >= 0.0))
        throw DataError("smoothing weights must be non-negative");
    const std::size_t n = observed.size();
    if (n < 2) throw DataError("reconciliation needs at least 2 samples");

    // Affine trends are in the null space of both difference stencils, so
    // the operator passes them through unchanged. Detrending before the
    // solve keeps the numerics accurate despite the stiff jerk scaling
    // (the matrix condition number is ~w_jerk/dt^6).
    const double t_mid = 0.5 * static_cast<double>(n - 1);
    double sum_v = 0.0, sum_tv = 0.0, sum_tt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tc = static_cast<double>(i) - t_mid;
        sum_v += observed[i];
        sum_tv += tc * observed[i];
        sum_tt += tc * tc;
    }
    const double mean = sum_v / static_cast<double>(n);
    const double slope = sum_tt > 0.0 ? sum_tv / sum_tt : 0.0;
    const auto trend = [&](std::size_t i) {
        return mean + slope * (static_cast<double>(i) - t_mid);
    };

    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i)
        rhs(i) = weights.perturbation * (observed[i] - trend(i));

    const Eigen::SparseMatrix<double> k = normal_matrix(n, dt, weights);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(k);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("reconciliation normal equations not SPD");
    Eigen::VectorXd solution = solver.solve(rhs);
    for (int refine = 0; refine < 3; ++refine) {
        const Eigen::VectorXd residual = rhs - k * solution;
        solution += solver.solve(residual);
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = trend(i) + solution(i);
    return out;
}

Trajectory reconcile_trajectory(const Trajectory& trajectory,
                                const ReconciliationWeights& weights) {
    const std::vector<double>& t = trajectory.timestamps;
    if (t.size() < 2) throw DataError("reconciliation needs at least 2 samples");
    const double dt = t[1] - t[0];
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6)
            throw DataError("reconciliation requires uniform sampling; resample first");

    Trajectory out = trajectory;
    out.x_positions = reconcile_series(trajectory.x_positions, dt, weights);
    out.y_positions = reconcile_series(trajectory.y_positions, dt, weights);
    out.starting_x = out.x_positions.front();
    out.ending_x = out.x_positions.back();
    return out;
}

ReconciliationWeights parse_reconciliation_weights(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    ReconciliationWeights w;
    w.perturbation = doc.value("perturbation", w.perturbation);
    w.accel = doc.value("accel", w.accel);
    w.jerk = doc.value("jerk", w.jerk);
    return w;
}

ReconciliationWeights read_weights_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open weights file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_reconciliation_weights(buf.str());
}

}  // namespace trajlab
