#pragma once

#include <vector>

#include "trajlab/trajectory.hpp"

namespace trajlab {

// Span of input time with no samples, longer than the reporting threshold.
struct GapSpan {
    double t_begin = 0.0;
    double t_end = 0.0;
};

inline constexpr double kGapReportThreshold = 0.5;  // seconds

// Resamples one trajectory onto the global grid k/rate_hz (unix-epoch
// aligned), covering [ceil(first*rate)/rate, floor(last*rate)/rate], with
// linear interpolation of positions. Dimension, class, id and direction
// fields are copied. Inputs already sampled uniformly at exactly rate_hz
// are returned unchanged (released data can sit on a half-step phase of
// the epoch lattice; resampling must be a no-op for it).
//
// Internal gaps longer than kGapReportThreshold are interpolated across
// but appended to `gaps` when provided.
//
// Throws DataError for fewer than 2 samples, non-increasing timestamps,
// non-positive rate, or an empty output grid.
Trajectory resample_trajectory(const Trajectory& trajectory, double rate_hz,
                               std::vector<GapSpan>* gaps = nullptr);

// Resamples every trajectory in the dataset.
Dataset resample_dataset(const Dataset& dataset, double rate_hz,
                         std::vector<GapSpan>* gaps = nullptr);

// Finite-difference derivative of x_position at uniform sampling.
// order 1/2/3 -> ft/s, ft/s^2, ft/s^3. Central stencils in the interior,
// one-sided stencils at the ends; output length equals input length.
// Throws DataError when sampling is not uniform (resample first).
std::vector<double> finite_difference(const Trajectory& trajectory, int order);

// Same stencils applied to an arbitrary uniformly sampled series.
std::vector<double> finite_difference_series(const std::vector<double>& values,
                                             double dt, int order);

}  // namespace trajlab
