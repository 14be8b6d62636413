#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "trajlab/macrofield.hpp"

namespace trajlab {

// Speed time series at a fixed roadway location, on the field's uniform
// time grid. Empty bins are filled by linear interpolation and flagged.
struct SpeedSeries {
    double x_location = 0.0;
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;        // ft/s
    std::vector<bool> interpolated;    // true where the bin was empty
    double gap_fraction = 0.0;
};

// Throws NoFeatureError when more than half of the column is empty.
SpeedSeries extract_speed_series(const MacroField& field, double x_location);

struct CrossCorrOptions {
    double max_lag_s = 600.0;
    double prominence = 0.2;  // minimum normalized correlation at the peak
    // Series with speed fluctuations below this are treated as wave-free;
    // normalized correlation would otherwise amplify binning noise.
    double min_fluctuation_ftps = 1.0;
};

// Wave propagation speed from the first prominent positive-lag correlation
// peak between two locations: speed = separation / lag, in mph, positive
// upstream. series_a must be the location the wave reaches first.
// Throws NoFeatureError when no qualifying peak exists.
double wave_speed_crosscorr(const SpeedSeries& series_a, const SpeedSeries& series_b,
                            double separation_ft,
                            const CrossCorrOptions& options = {});

struct WaveSpeedDistribution {
    double mean_mph = 0.0;
    double std_mph = 0.0;
    std::size_t pairs_used = 0;
    std::size_t pairs_dropped = 0;
};

struct WaveDistributionOptions {
    // Pairs stay nearby: separations beyond one wavelength alias the first
    // correlation peak onto a shorter lag and inflate the speed estimate.
    double min_separation_ft = 500.0;
    double max_separation_ft = 1200.0;
    CrossCorrOptions crosscorr;
};

// Seeded random location pairs; per-pair estimates via cross-correlation;
// pairs with no detectable wave are dropped and counted.
WaveSpeedDistribution wave_speed_distribution(const MacroField& field,
                                              std::size_t n_pairs, std::uint64_t seed,
                                              const WaveDistributionOptions& options = {});

// Continuous wavelet transform with the real Morlet mother wavelet
// psi(t) = exp(-t^2/2) cos(5 t), direct convolution on the sample grid.
struct Scaleogram {
    std::vector<double> scales;       // seconds
    double t0 = 0.0;
    double dt = 0.0;
    Eigen::MatrixXd coefficients;     // scales x time
    Eigen::MatrixXd power;            // |X|^2
    std::vector<bool> scale_flagged;  // scale below the 2-sample resolution
    // Carrier-frequency conversion: period = 2*pi*a / 5.
    static constexpr double kPeriodFactor = 2.0 * 3.14159265358979323846 / 5.0;
    double period_of(std::size_t scale_index) const {
        return kPeriodFactor * scales[scale_index];
    }
};

Scaleogram cwt_morlet(const SpeedSeries& series, const std::vector<double>& scales);

// Log-spaced scales covering [period_min, period_max] (seconds).
std::vector<double> log_scales_for_periods(double period_min_s, double period_max_s,
                                           std::size_t count);

struct DominantPeriodResult {
    double period_min = 0.0;     // minutes
    std::size_t scale_index = 0;
    double peak_to_median = 0.0;
};

// Scale of maximum window-integrated power, converted to period (minutes).
// Throws NoFeatureError when the power spectrum is flat (max/median < 1.5).
DominantPeriodResult dominant_period(const Scaleogram& scaleogram, double window_t0,
                                     double window_t1);

double morlet_wavelet(double t);

std::string write_scaleogram_csv(const Scaleogram& scaleogram);

}  // namespace trajlab
