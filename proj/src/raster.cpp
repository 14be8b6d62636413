#include "trajlab/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <zlib.h>

#include "trajlab/errors.hpp"
#include "trajlab/resample.hpp"

namespace trajlab {

std::array<std::uint8_t, 3> speed_color(double speed_ftps, double vmax_ftps) {
    // red (stopped) -> orange -> yellow -> green (free flow)
    static const double stops[4] = {0.0, 0.35, 0.65, 1.0};
    static const int colors[4][3] = {
        {165, 10, 25}, {235, 120, 25}, {245, 225, 40}, {25, 160, 50}};
    double u = speed_ftps / vmax_ftps;
    u = std::clamp(u, 0.0, 1.0);
    int seg = 0;
    while (seg < 2 && u > stops[seg + 1]) ++seg;
    const double w = (u - stops[seg]) / (stops[seg + 1] - stops[seg]);
    std::array<std::uint8_t, 3> out;
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<std::uint8_t>(
            std::lround(colors[seg][c] + w * (colors[seg + 1][c] - colors[seg][c])));
    return out;
}

namespace {

Raster raster_from_speed_grid(const Eigen::ArrayXXd& speed, double x0, double t0,
                              double dx, double dt, const RasterOptions& options) {
    const int nx = static_cast<int>(speed.rows());
    const int nt = static_cast<int>(speed.cols());
    if (nx <= 0 || nt <= 0) throw DataError("raster extent has zero area");
    const int scale = std::max(1, options.pixel_scale);

    Raster raster;
    raster.speed = speed;
    raster.x0 = x0;
    raster.t0 = t0;
    raster.dx = dx;
    raster.dt = dt;
    raster.width = nt * scale;
    raster.height = nx * scale;
    raster.rgb.assign(static_cast<std::size_t>(raster.width) * raster.height * 3, 0);

    for (int ix = 0; ix < nx; ++ix) {
        // top pixel row = largest x bin
        const int row0 = (nx - 1 - ix) * scale;
        for (int it = 0; it < nt; ++it) {
            const double v = speed(ix, it);
            const std::array<std::uint8_t, 3> color =
                std::isnan(v) ? kGapColor : speed_color(v, options.vmax_ftps);
            for (int ry = 0; ry < scale; ++ry) {
                std::uint8_t* row =
                    raster.rgb.data() +
                    (static_cast<std::size_t>(row0 + ry) * raster.width + it * scale) * 3;
                for (int rx = 0; rx < scale; ++rx) {
                    row[3 * rx] = color[0];
                    row[3 * rx + 1] = color[1];
                    row[3 * rx + 2] = color[2];
                }
            }
        }
    }
    return raster;
}

}  // namespace

Raster raster_timespace(const MacroField& field, const RasterOptions& options) {
    Eigen::ArrayXXd speed(field.nx, field.nt);
    for (int ix = 0; ix < field.nx; ++ix)
        for (int it = 0; it < field.nt; ++it) speed(ix, it) = field.speed(ix, it);
    return raster_from_speed_grid(speed, field.x0, field.t0, field.dx, field.dt, options);
}

Raster raster_timespace(const Dataset& dataset, const RasterOptions& options) {
    double x_min = 1e300, x_max = -1e300, t_min = 1e300, t_max = -1e300;
    for (const Trajectory& traj : dataset.trajectories) {
        for (double x : traj.x_positions) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
        }
        t_min = std::min(t_min, traj.first_timestamp);
        t_max = std::max(t_max, traj.last_timestamp);
    }
    if (!(x_max > x_min) || !(t_max > t_min))
        throw DataError("raster extent has zero area");

    const int nx = static_cast<int>(std::ceil((x_max - x_min) / options.dx));
    const int nt = static_cast<int>(std::ceil((t_max - t_min) / options.dt));
    Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(nx, nt);
    Eigen::ArrayXXd count = Eigen::ArrayXXd::Zero(nx, nt);
    for (const Trajectory& traj : dataset.trajectories) {
        const std::vector<double> v = finite_difference(traj, 1);
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const int ix = std::min(
                nx - 1,
                static_cast<int>((traj.x_positions[i] - x_min) / options.dx));
            const int it = std::min(
                nt - 1, static_cast<int>((traj.timestamps[i] - t_min) / options.dt));
            if (ix < 0 || it < 0) continue;
            sum(ix, it) += std::abs(v[i]);
            count(ix, it) += 1.0;
        }
    }
    Eigen::ArrayXXd speed(nx, nt);
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it)
            speed(ix, it) = count(ix, it) > 0.0
                                ? sum(ix, it) / count(ix, it)
                                : std::numeric_limits<double>::quiet_NaN();
    return raster_from_speed_grid(speed, x_min, t_min, options.dx, options.dt, options);
}

std::string write_raster_csv(const Raster& raster) {
    std::ostringstream out;
    out.precision(17);
    out << "# meta x0=" << raster.x0 << " t0=" << raster.t0 << " dx=" << raster.dx
        << " dt=" << raster.dt << " nx=" << raster.speed.rows()
        << " nt=" << raster.speed.cols() << "\n";
    for (Eigen::Index ix = 0; ix < raster.speed.rows(); ++ix) {
        for (Eigen::Index it = 0; it < raster.speed.cols(); ++it) {
            if (it) out << ",";
            const double v = raster.speed(ix, it);
            if (!std::isnan(v)) out << v;
        }
        out << "\n";
    }
    return out.str();
}

namespace {

void append_be32(std::string& out, std::uint32_t value) {
    out.push_back(static_cast<char>((value >> 24) & 0xff));
    out.push_back(static_cast<char>((value >> 16) & 0xff));
    out.push_back(static_cast<char>((value >> 8) & 0xff));
    out.push_back(static_cast<char>(value & 0xff));
}

void append_chunk(std::string& out, const char type[4], const std::string& payload) {
    append_be32(out, static_cast<std::uint32_t>(payload.size()));
    std::string body(type, 4);
    body += payload;
    out += body;
    const auto crc =
        crc32(0L, reinterpret_cast<const Bytef*>(body.data()), body.size());
    append_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_png(const std::string& path, const Raster& raster) {
    if (raster.width <= 0 || raster.height <= 0)
        throw DataError("raster extent has zero area");

    // filter byte 0 + raw RGB per scanline
    std::string scanlines;
    scanlines.reserve(static_cast<std::size_t>(raster.height) * (raster.width * 3 + 1));
    for (int y = 0; y < raster.height; ++y) {
        scanlines.push_back('\0');
        scanlines.append(reinterpret_cast<const char*>(raster.rgb.data() +
                                                       static_cast<std::size_t>(y) *
                                                           raster.width * 3),
                         static_cast<std::size_t>(raster.width) * 3);
    }
    uLongf compressed_size = compressBound(scanlines.size());
    std::string compressed(compressed_size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &compressed_size,
                  reinterpret_cast<const Bytef*>(scanlines.data()), scanlines.size(),
                  6) != Z_OK)
        throw ConvergenceError("png deflate failed");
    compressed.resize(compressed_size);

    std::string png("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    append_be32(ihdr, static_cast<std::uint32_t>(raster.width));
    append_be32(ihdr, static_cast<std::uint32_t>(raster.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type RGB
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // no interlace
    append_chunk(png, "IHDR", ihdr);
    append_chunk(png, "IDAT", compressed);
    append_chunk(png, "IEND", "");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open PNG output: " + path);
    out << png;
}

}  // namespace trajlab
