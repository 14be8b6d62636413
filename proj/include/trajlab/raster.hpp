#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trajlab/macrofield.hpp"
#include "trajlab/trajectory.hpp"

namespace trajlab {

// Speed color map over [0, vmax]; gaps (no observation) render in a fixed
// sentinel color so missing-data bands stay visible.
std::array<std::uint8_t, 3> speed_color(double speed_ftps, double vmax_ftps);
inline constexpr std::array<std::uint8_t, 3> kGapColor = {235, 235, 235};

struct RasterOptions {
    double vmax_ftps = 120.0;
    int pixel_scale = 1;  // integer upscaling of grid cells to pixels
    // used when rasterizing a dataset directly (point splatting)
    double dx = 25.0;
    double dt = 5.0;
};

struct Raster {
    int width = 0;   // time axis, pixels
    int height = 0;  // space axis, pixels (top row = largest x)
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
    // Speed grid behind the pixels (nx rows, nt cols; NaN = gap).
    Eigen::ArrayXXd speed;
    double x0 = 0.0, t0 = 0.0, dx = 0.0, dt = 0.0;
};

// Rasterizes a macro field (bin speed -> color, empty bin -> gap color).
Raster raster_timespace(const MacroField& field, const RasterOptions& options);

// Direct trajectory point splatting: per-sample finite-difference speeds
// averaged per cell.
Raster raster_timespace(const Dataset& dataset, const RasterOptions& options);

// Speed grid as CSV (rows = x bins from low to high, cols = t bins; empty
// cells for gaps).
std::string write_raster_csv(const Raster& raster);

// Minimal RGB8 PNG encoder (zlib-deflated, filter 0).
void write_png(const std::string& path, const Raster& raster);

}  // namespace trajlab
