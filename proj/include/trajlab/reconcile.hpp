#pragma once

#include <string>

#include "trajlab/trajectory.hpp"

namespace trajlab {

// Weights of the reconciliation objective
//   w_perturbation * ||x - x_hat||^2 + w_accel * ||D2 x||^2 + w_jerk * ||D3 x||^2
// where D2/D3 are second/third central difference stencils scaled to
// physical ft/s^2 and ft/s^3 at the 25 Hz step. The same weights apply to
// the lateral axis.
struct ReconciliationWeights {
    double perturbation = 1.0;
    double accel = 10.0;
    double jerk = 100.0;
};

// Solves the banded symmetric positive-definite normal equations exactly,
// per axis; positions are replaced, timestamps kept. Requires uniform
// sampling and perturbation > 0 (the problem is ill-posed otherwise).
Trajectory reconcile_trajectory(const Trajectory& trajectory,
                                const ReconciliationWeights& weights);

// The objective value of candidate positions against the observed ones.
double reconciliation_objective(const std::vector<double>& candidate,
                                const std::vector<double>& observed, double dt,
                                const ReconciliationWeights& weights);

// Smooths one uniformly sampled series (building block of the above).
std::vector<double> reconcile_series(const std::vector<double>& observed, double dt,
                                     const ReconciliationWeights& weights);

ReconciliationWeights parse_reconciliation_weights(const std::string& text);
ReconciliationWeights read_weights_file(const std::string& path);

}  // namespace trajlab
