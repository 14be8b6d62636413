#include "trajlab/waves.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "trajlab/errors.hpp"

namespace trajlab {

double morlet_wavelet(double t) { return std::exp(-0.5 * t * t) * std::cos(5.0 * t); }

SpeedSeries extract_speed_series(const MacroField& field, double x_location) {
    const int ix = static_cast<int>(std::floor((x_location - field.x0) / field.dx));
    if (ix < 0 || ix >= field.nx)
        throw DataError("speed-series location outside the field extent");

    SpeedSeries series;
    series.x_location = x_location;
    series.t0 = field.t0 + 0.5 * field.dt;
    series.dt = field.dt;
    series.values.resize(field.nt);
    series.interpolated.assign(field.nt, false);

    std::size_t empty = 0;
    for (int it = 0; it < field.nt; ++it) {
        if (field.empty_bin(ix, it)) {
            series.interpolated[it] = true;
            ++empty;
        } else {
            series.values[it] = field.speed(ix, it);
        }
    }
    series.gap_fraction = static_cast<double>(empty) / std::max(1, field.nt);
    if (series.gap_fraction > 0.5)
        throw NoFeatureError("insufficient data: over half the column is empty");

    // Linear interpolation across flagged bins, nearest-fill at the edges.
    int prev = -1;
    for (int it = 0; it < field.nt; ++it) {
        if (series.interpolated[it]) continue;
        if (prev < 0) {
            for (int k = 0; k < it; ++k) series.values[k] = series.values[it];
        } else if (it - prev > 1) {
            for (int k = prev + 1; k < it; ++k) {
                const double u = static_cast<double>(k - prev) / (it - prev);
                series.values[k] =
                    series.values[prev] + u * (series.values[it] - series.values[prev]);
            }
        }
        prev = it;
    }
    if (prev >= 0)
        for (int k = prev + 1; k < field.nt; ++k) series.values[k] = series.values[prev];
    return series;
}

double wave_speed_crosscorr(const SpeedSeries& series_a, const SpeedSeries& series_b,
                            double separation_ft, const CrossCorrOptions& options) {
    if (!(separation_ft > 0.0)) throw DataError("separation must be positive");
    if (series_a.values.size() != series_b.values.size() ||
        std::abs(series_a.dt - series_b.dt) > 1e-9)
        throw DataError("cross-correlation needs series on the same time grid");
    const std::size_t n = series_a.values.size();
    if (n < 8) throw DataError("series too short for cross-correlation");

    // Mean removal once, then overlap-normalized correlation per lag.
    std::vector<double> a(series_a.values), b(series_b.values);
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] -= mean_a;
        b[i] -= mean_b;
    }
    double var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        var_a += a[i] * a[i];
        var_b += b[i] * b[i];
    }
    if (std::sqrt(var_a / n) < options.min_fluctuation_ftps ||
        std::sqrt(var_b / n) < options.min_fluctuation_ftps)
        throw NoFeatureError("speed fluctuations below the detection floor (no wave)");

    const std::size_t max_lag = std::min<std::size_t>(
        n - 4, static_cast<std::size_t>(options.max_lag_s / series_a.dt));
    const auto corr_at = [&](std::size_t lag) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) {
            dot += a[i] * b[i + lag];
            na += a[i] * a[i];
            nb += b[i + lag] * b[i + lag];
        }
        const double denom = std::sqrt(na * nb);
        return denom > 0.0 ? dot / denom : 0.0;
    };

    std::vector<double> r(max_lag + 1);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) r[lag] = corr_at(lag);

    // First prominent positive-lag local maximum.
    for (std::size_t lag = 1; lag + 1 <= max_lag; ++lag) {
        if (r[lag] < options.prominence) continue;
        if (!(r[lag] >= r[lag - 1] && r[lag] > r[lag + 1])) continue;
        // parabolic sub-bin refinement
        const double denom = r[lag - 1] - 2.0 * r[lag] + r[lag + 1];
        double shift = 0.0;
        if (denom < -1e-12) shift = 0.5 * (r[lag - 1] - r[lag + 1]) / denom;
        shift = std::clamp(shift, -0.5, 0.5);
        const double lag_s = (static_cast<double>(lag) + shift) * series_a.dt;
        if (!(lag_s > 0.0)) continue;
        return separation_ft / lag_s * kFtpsToMph;
    }
    throw NoFeatureError("no prominent positive-lag correlation peak (no wave detected)");
}

WaveSpeedDistribution wave_speed_distribution(const MacroField& field,
                                              std::size_t n_pairs, std::uint64_t seed,
                                              const WaveDistributionOptions& options) {
    if (n_pairs < 2) throw DataError("wave speed distribution needs at least 2 pairs");
    std::mt19937_64 rng(seed);
    const double extent = field.dx * field.nx;
    if (extent <= options.min_separation_ft)
        throw DataError("field shorter than the minimum pair separation");

    // Waves move upstream: against traffic. The series that sees the wave
    // first is downstream: larger x for +1 direction, smaller x for -1.
    const int direction = field.direction != 0 ? field.direction : -1;

    WaveSpeedDistribution result;
    std::vector<double> speeds;
    const double margin = 0.5 * field.dx;
    const double sep_cap = std::min(options.max_separation_ft, extent - 2.0 * margin);
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const double u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double sep =
            options.min_separation_ft + u2 * (sep_cap - options.min_separation_ft);
        const double xa = field.x0 + margin + u1 * (extent - 2.0 * margin - sep);
        const double xb = xa + sep;
        const double x_down = direction > 0 ? std::max(xa, xb) : std::min(xa, xb);
        const double x_up = direction > 0 ? std::min(xa, xb) : std::max(xa, xb);
        try {
            const SpeedSeries lead = extract_speed_series(field, x_down);
            const SpeedSeries lag = extract_speed_series(field, x_up);
            speeds.push_back(wave_speed_crosscorr(lead, lag, std::abs(x_down - x_up),
                                                  options.crosscorr));
        } catch (const NoFeatureError&) {
            ++result.pairs_dropped;
        }
    }
    if (speeds.empty())
        throw NoFeatureError("no wave detected in any sampled location pair");

    double mean = 0.0;
    for (double s : speeds) mean += s;
    mean /= static_cast<double>(speeds.size());
    double var = 0.0;
    for (double s : speeds) var += (s - mean) * (s - mean);
    var /= static_cast<double>(speeds.size());
    result.mean_mph = mean;
    result.std_mph = std::sqrt(var);
    result.pairs_used = speeds.size();
    return result;
}

std::vector<double> log_scales_for_periods(double period_min_s, double period_max_s,
                                           std::size_t count) {
    if (!(period_min_s > 0.0) || !(period_max_s > period_min_s) || count < 2)
        throw DataError("invalid scale range");
    std::vector<double> scales(count);
    const double a_min = period_min_s / Scaleogram::kPeriodFactor;
    const double a_max = period_max_s / Scaleogram::kPeriodFactor;
    for (std::size_t i = 0; i < count; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(count - 1);
        scales[i] = a_min * std::pow(a_max / a_min, u);
    }
    return scales;
}

Scaleogram cwt_morlet(const SpeedSeries& series, const std::vector<double>& scales) {
    if (scales.empty()) throw DataError("cwt needs at least one scale");
    for (double a : scales)
        if (!(a > 0.0)) throw DataError("cwt scales must be positive");
    const std::size_t n = series.values.size();
    if (n < 4) throw DataError("series too short for cwt");

    // Mean removal first; zero padding outside the series (edge cone).
    std::vector<double> x(series.values);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : x) v -= mean;

    Scaleogram out;
    out.scales = scales;
    out.t0 = series.t0;
    out.dt = series.dt;
    out.coefficients.resize(static_cast<Eigen::Index>(scales.size()),
                            static_cast<Eigen::Index>(n));
    out.scale_flagged.assign(scales.size(), false);

    for (std::size_t s = 0; s < scales.size(); ++s) {
        const double a = scales[s];
        if (a < 2.0 * series.dt) out.scale_flagged[s] = true;
        const double norm = series.dt / std::sqrt(a);
        const std::ptrdiff_t reach =
            static_cast<std::ptrdiff_t>(std::ceil(6.0 * a / series.dt));
        // precompute the sampled wavelet kernel
        std::vector<double> kernel(2 * reach + 1);
        for (std::ptrdiff_t k = -reach; k <= reach; ++k)
            kernel[static_cast<std::size_t>(k + reach)] =
                morlet_wavelet(static_cast<double>(k) * series.dt / a);
        for (std::size_t b = 0; b < n; ++b) {
            double sum = 0.0;
            const std::ptrdiff_t lo =
                std::max<std::ptrdiff_t>(-reach, -static_cast<std::ptrdiff_t>(b));
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                reach, static_cast<std::ptrdiff_t>(n - 1 - b));
            for (std::ptrdiff_t k = lo; k <= hi; ++k)
                sum += x[b + k] * kernel[static_cast<std::size_t>(k + reach)];
            out.coefficients(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(b)) =
                sum * norm;
        }
    }
    out.power = out.coefficients.array().square();
    return out;
}

DominantPeriodResult dominant_period(const Scaleogram& scaleogram, double window_t0,
                                     double window_t1) {
    const Eigen::Index nt = scaleogram.power.cols();
    const auto col_of = [&](double t) {
        return static_cast<Eigen::Index>(std::floor((t - scaleogram.t0) / scaleogram.dt));
    };
    Eigen::Index c0 = std::max<Eigen::Index>(0, col_of(window_t0));
    Eigen::Index c1 = std::min<Eigen::Index>(nt - 1, col_of(window_t1));
    if (c1 < c0) throw DataError("dominant-period window outside the scaleogram");

    std::vector<double> integrated;
    std::vector<std::size_t> index;
    for (std::size_t s = 0; s < scaleogram.scales.size(); ++s) {
        if (scaleogram.scale_flagged[s]) continue;
        double sum = 0.0;
        for (Eigen::Index c = c0; c <= c1; ++c)
            sum += scaleogram.power(static_cast<Eigen::Index>(s), c);
        integrated.push_back(sum);
        index.push_back(s);
    }
    if (integrated.empty()) throw DataError("no usable scales in the scaleogram");

    std::vector<double> sorted = integrated;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const auto max_it = std::max_element(integrated.begin(), integrated.end());
    const double peak = *max_it;
    if (!(median > 0.0) || peak / median < 1.5)
        throw NoFeatureError("power spectrum is flat: no dominant period");

    DominantPeriodResult result;
    result.scale_index = index[static_cast<std::size_t>(max_it - integrated.begin())];
    result.period_min = scaleogram.period_of(result.scale_index) / 60.0;
    result.peak_to_median = peak / median;
    return result;
}

std::string write_scaleogram_csv(const Scaleogram& scaleogram) {
    std::ostringstream out;
    out.precision(17);
    out << "# meta t0=" << scaleogram.t0 << " dt=" << scaleogram.dt
        << " scales=" << scaleogram.scales.size() << "\n";
    out << "scale_s,period_min";
    for (Eigen::Index c = 0; c < scaleogram.power.cols(); ++c)
        out << ",t" << (scaleogram.t0 + scaleogram.dt * static_cast<double>(c));
    out << "\n";
    for (std::size_t s = 0; s < scaleogram.scales.size(); ++s) {
        out << scaleogram.scales[s] << "," << scaleogram.period_of(s) / 60.0;
        for (Eigen::Index c = 0; c < scaleogram.power.cols(); ++c)
            out << "," << scaleogram.power(static_cast<Eigen::Index>(s), c);
        out << "\n";
    }
    return out.str();
}

}  // namespace trajlab
