#include "trajlab/camera.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

Eigen::Vector2d apply_h(const Eigen::Matrix3d& m, const Eigen::Vector2d& p) {
    const Eigen::Vector3d q = m * Eigen::Vector3d(p.x(), p.y(), 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
}

// Similarity normalization: centroid to origin, mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());
    double mean_dist = 0.0;
    for (const auto& p : pts) mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(pts.size());
    const double scale = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
    Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
    t(0, 0) = t(1, 1) = scale;
    t(0, 2) = -scale * centroid.x();
    t(1, 2) = -scale * centroid.y();
    return t;
}

double reprojection_mse(const Eigen::Matrix3d& h,
                        const std::vector<Correspondence>& cs) {
    double sum = 0.0;
    for (const auto& c : cs) {
        const Eigen::Vector2d mapped = apply_h(h, c.image);
        sum += (mapped - Eigen::Vector2d(c.state.x(), c.state.y())).squaredNorm();
    }
    return sum;
}

// Levenberg-style refinement of the exact squared-reprojection objective
// over the 9 entries of H (norm fixed to 1 after every step).
Eigen::Matrix3d refine_homography(Eigen::Matrix3d h,
                                  const std::vector<Correspondence>& cs) {
    h /= h.norm();
    double lambda = 1e-3;
    double current = reprojection_mse(h, cs);
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::Matrix<double, 9, 1> grad = Eigen::Matrix<double, 9, 1>::Zero();
        Eigen::Matrix<double, 9, 9> hess = Eigen::Matrix<double, 9, 9>::Zero();
        for (const auto& c : cs) {
            const Eigen::Vector3d v(c.image.x(), c.image.y(), 1.0);
            const Eigen::Vector3d q = h * v;
            const double w = q.z();
            const Eigen::Vector2d r(q.x() / w - c.state.x(), q.y() / w - c.state.y());
            Eigen::Matrix<double, 2, 9> jac = Eigen::Matrix<double, 2, 9>::Zero();
            for (int k = 0; k < 3; ++k) {
                jac(0, k) = v(k) / w;
                jac(1, 3 + k) = v(k) / w;
                jac(0, 6 + k) = -q.x() * v(k) / (w * w);
                jac(1, 6 + k) = -q.y() * v(k) / (w * w);
            }
            grad += jac.transpose() * r;
            hess += jac.transpose() * jac;
        }
        if (grad.norm() < 1e-14) break;
        bool stepped = false;
        for (int tries = 0; tries < 8 && !stepped; ++tries) {
            Eigen::Matrix<double, 9, 9> damped = hess;
            damped.diagonal().array() += lambda * hess.diagonal().array().maxCoeff();
            const Eigen::Matrix<double, 9, 1> delta = damped.ldlt().solve(grad);
            Eigen::Matrix3d trial = h;
            for (int k = 0; k < 9; ++k) trial(k / 3, k % 3) -= delta(k);
            trial /= trial.norm();
            const double cost = reprojection_mse(trial, cs);
            if (cost < current) {
                h = trial;
                current = cost;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) break;
    }
    return h;
}

}  // namespace

Homography fit_homography(const std::vector<Correspondence>& correspondences) {
    if (correspondences.size() < 4)
        throw DataError("homography fit needs at least 4 correspondences");

    std::vector<Eigen::Vector2d> img, grd;
    img.reserve(correspondences.size());
    grd.reserve(correspondences.size());
    for (const auto& c : correspondences) {
        img.push_back(c.image);
        grd.emplace_back(c.state.x(), c.state.y());
    }
    const Eigen::Matrix3d t_img = normalizing_transform(img);
    const Eigen::Matrix3d t_grd = normalizing_transform(grd);

    Eigen::MatrixXd design(2 * correspondences.size(), 9);
    for (std::size_t i = 0; i < correspondences.size(); ++i) {
        const Eigen::Vector2d u = apply_h(t_img, img[i]);
        const Eigen::Vector2d x = apply_h(t_grd, grd[i]);
        design.row(2 * i) << u.x(), u.y(), 1.0, 0.0, 0.0, 0.0, -x.x() * u.x(),
            -x.x() * u.y(), -x.x();
        design.row(2 * i + 1) << 0.0, 0.0, 0.0, u.x(), u.y(), 1.0, -x.y() * u.x(),
            -x.y() * u.y(), -x.y();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    // Rank 8 is required for a unique solution; collinear/coincident point
    // configurations collapse the second-smallest singular value.
    if (sv(sv.size() - 2) < 1e-9 * sv(0))
        throw DataError("degenerate correspondence configuration for homography fit");
    const Eigen::Matrix<double, 9, 1> hvec = svd.matrixV().col(8);
    Eigen::Matrix3d h_norm;
    h_norm << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7),
        hvec(8);
    Eigen::Matrix3d h = t_grd.inverse() * h_norm * t_img;

    h = refine_homography(h, correspondences);

    Homography out;
    out.H = h / h(2, 2);
    out.H_inv = out.H.inverse();
    out.H_inv /= out.H_inv(2, 2);
    out.residual_ft = std::sqrt(reprojection_mse(out.H, correspondences) /
                                static_cast<double>(correspondences.size()));
    return out;
}

Eigen::Vector2d image_to_ground(const Eigen::Vector2d& pixel, const Homography& h) {
    return apply_h(h.H, pixel);
}

Eigen::Vector2d ground_to_image(const Eigen::Vector2d& ground, const Homography& h) {
    return apply_h(h.H_inv, ground);
}

namespace {

double projection_mse(const Eigen::Matrix<double, 3, 4>& p,
                      const std::vector<Correspondence>& cs) {
    double sum = 0.0;
    for (const auto& c : cs) {
        const Eigen::Vector4d v(c.state.x(), c.state.y(), c.state.z(), 1.0);
        const Eigen::Vector3d q = p * v;
        const Eigen::Vector2d mapped(q.x() / q.z(), q.y() / q.z());
        sum += (mapped - c.image).squaredNorm();
    }
    return sum;
}

}  // namespace

Projection fit_projection(const Homography& homography,
                          const std::vector<VerticalSegment>& verticals,
                          const std::vector<Correspondence>& elevated) {
    if (verticals.size() < 2)
        throw DataError("projection fit needs at least 2 vertical segments");

    // Least-squares intersection of the extended segments.
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    for (const auto& seg : verticals) {
        Eigen::Vector2d dir = seg.top - seg.bottom;
        const double len = dir.norm();
        if (len < 1e-12) throw DataError("zero-length vertical segment");
        dir /= len;
        const Eigen::Vector2d normal(-dir.y(), dir.x());
        a += normal * normal.transpose();
        b += normal * normal.dot(seg.bottom);
    }
    // Parallel segments leave the normal equations rank-1.
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
    if (es.eigenvalues()(0) < 1e-10 * std::max(es.eigenvalues()(1), 1e-300))
        throw DataError("vertical segments are parallel; z vanishing point at infinity "
                        "(orthographic degenerate)");
    const Eigen::Vector2d vp = a.ldlt().solve(b);

    bool has_elevated = false;
    for (const auto& c : elevated)
        if (std::abs(c.state.z()) > 1e-12) has_elevated = true;
    if (!has_elevated)
        throw DataError("projection scale unconstrained: no correspondence with "
                        "nonzero height");

    Eigen::Matrix<double, 3, 4> p;
    p.col(0) = homography.H_inv.col(0);
    p.col(1) = homography.H_inv.col(1);
    p.col(3) = homography.H_inv.col(2);

    const auto with_p33 = [&](double p33) {
        Eigen::Matrix<double, 3, 4> full = p;
        full.col(2) = p33 * Eigen::Vector3d(vp.x(), vp.y(), 1.0);
        return full;
    };

    // Each elevated point yields closed-form p33 candidates; the objective is
    // then polished by golden section around the candidate bracket.
    std::vector<double> candidates;
    for (const auto& c : elevated) {
        if (std::abs(c.state.z()) < 1e-12) continue;
        const Eigen::Vector3d ground =
            homography.H_inv * Eigen::Vector3d(c.state.x(), c.state.y(), 1.0);
        const double z = c.state.z();
        for (int axis = 0; axis < 2; ++axis) {
            const double num = c.image(axis) * ground.z() - ground(axis);
            const double den = z * (vp(axis) - c.image(axis));
            if (std::abs(den) > 1e-12) candidates.push_back(num / den);
        }
    }
    if (candidates.empty())
        throw DataError("projection scale unconstrained by the supplied points");
    double lo = *std::min_element(candidates.begin(), candidates.end());
    double hi = *std::max_element(candidates.begin(), candidates.end());
    const double pad = std::max(1e-9, 0.5 * (hi - lo)) + 1e-6 * std::abs(lo);
    lo -= pad;
    hi += pad;

    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = projection_mse(with_p33(x1), elevated);
    double f2 = projection_mse(with_p33(x2), elevated);
    while (hi - lo > 1e-14 * std::max(1.0, std::abs(hi))) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = projection_mse(with_p33(x1), elevated);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = projection_mse(with_p33(x2), elevated);
        }
    }
    const double p33 = 0.5 * (lo + hi);

    Projection out;
    out.P = with_p33(p33);
    out.vanishing_point = vp;
    out.residual_px = std::sqrt(projection_mse(out.P, elevated) /
                                static_cast<double>(elevated.size()));
    return out;
}

Eigen::Vector2d project_point_to_image(const Eigen::Vector3d& point,
                                       const Projection& projection) {
    const Eigen::Vector3d q =
        projection.P * Eigen::Vector4d(point.x(), point.y(), point.z(), 1.0);
    if (!(q.z() > 0.0)) throw DomainError("point has non-positive projective depth");
    return {q.x() / q.z(), q.y() / q.z()};
}

std::array<Eigen::Vector2d, 8> project_box_to_image(const StatePlaneBox& box,
                                                    const Projection& projection) {
    std::array<Eigen::Vector2d, 8> out;
    const auto corners = box.corners();
    for (std::size_t i = 0; i < 8; ++i)
        out[i] = project_point_to_image(corners[i], projection);
    return out;
}

StatePlaneBox estimate_box_height(const ImageBox2D& box, const Homography& h,
                                  const Projection& p, double tolerance_px) {
    if (!(tolerance_px >= 0.0)) throw DataError("tolerance must be non-negative");

    std::array<Eigen::Vector2d, 4> footprint;
    for (int i = 0; i < 4; ++i) footprint[i] = image_to_ground(box.bottom[i], h);

    const auto make_box = [&](double height) {
        StatePlaneBox sp;
        sp.bbl = {footprint[0].x(), footprint[0].y(), 0.0};
        sp.bbr = {footprint[1].x(), footprint[1].y(), 0.0};
        sp.fbl = {footprint[2].x(), footprint[2].y(), 0.0};
        sp.fbr = {footprint[3].x(), footprint[3].y(), 0.0};
        sp.btl = sp.bbl + Eigen::Vector3d(0, 0, height);
        sp.btr = sp.bbr + Eigen::Vector3d(0, 0, height);
        sp.ftl = sp.fbl + Eigen::Vector3d(0, 0, height);
        sp.ftr = sp.fbr + Eigen::Vector3d(0, 0, height);
        return sp;
    };

    // Reprojected image height grows monotonically with box height, so the
    // signed difference against the labeled height brackets the solution.
    const auto top_points = [&](double height) {
        const StatePlaneBox sp = make_box(height);
        return std::array<Eigen::Vector2d, 4>{
            project_point_to_image(sp.btl, p), project_point_to_image(sp.btr, p),
            project_point_to_image(sp.ftl, p), project_point_to_image(sp.ftr, p)};
    };
    const auto signed_height_error = [&](double height) {
        const auto tops = top_points(height);
        double err = 0.0;
        for (int i = 0; i < 4; ++i)
            err += (tops[i] - box.bottom[i]).norm() - (box.top[i] - box.bottom[i]).norm();
        return err / 4.0;
    };
    const auto rms_error = [&](double height) {
        const auto tops = top_points(height);
        double sum = 0.0;
        for (int i = 0; i < 4; ++i) sum += (tops[i] - box.top[i]).squaredNorm();
        return std::sqrt(sum / 4.0);
    };

    constexpr double kMaxHeight = 30.0;  // ft, above any legal vehicle
    double lo = 0.0, hi = kMaxHeight;
    double f_lo = signed_height_error(lo);
    double f_hi = signed_height_error(hi);
    double best_h = lo, best_rms = rms_error(lo);
    if (f_lo * f_hi <= 0.0) {
        for (int iter = 0; iter < 80; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double f_mid = signed_height_error(mid);
            if (f_lo * f_mid <= 0.0) {
                hi = mid;
                f_hi = f_mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
        }
        best_h = 0.5 * (lo + hi);
        best_rms = rms_error(best_h);
    } else {
        // No sign change: the best attainable height sits at a range end.
        const double rms_hi = rms_error(kMaxHeight);
        if (rms_hi < best_rms) {
            best_h = kMaxHeight;
            best_rms = rms_hi;
        }
    }

    if (best_rms > tolerance_px)
        throw ConvergenceError("box height search did not meet the pixel tolerance",
                               best_rms);
    return make_box(best_h);
}

CalibrationSpec parse_calibration_spec(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    CalibrationSpec spec;
    const auto read_correspondences = [&](const char* key,
                                          std::vector<Correspondence>& out) {
        if (!doc.contains(key)) return;
        for (const auto& item : doc[key]) {
            Correspondence c;
            c.image = {item["image"][0].get<double>(), item["image"][1].get<double>()};
            const auto& st = item["state_plane"];
            c.state = {st[0].get<double>(), st[1].get<double>(),
                       st.size() > 2 ? st[2].get<double>() : 0.0};
            out.push_back(c);
        }
    };
    read_correspondences("correspondence_points", spec.ground);
    read_correspondences("height_correspondences", spec.elevated);
    if (doc.contains("vertical_segments")) {
        for (const auto& item : doc["vertical_segments"]) {
            VerticalSegment seg;
            seg.bottom = {item[0][0].get<double>(), item[0][1].get<double>()};
            seg.top = {item[1][0].get<double>(), item[1][1].get<double>()};
            spec.verticals.push_back(seg);
        }
    }
    return spec;
}

CalibrationSpec read_calibration_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open calibration file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_calibration_spec(buf.str());
}

std::string write_calibration(const CalibrationSpec& spec,
                              const CameraCalibration& calib) {
    nlohmann::ordered_json doc;
    auto points = nlohmann::ordered_json::array();
    for (const auto& c : spec.ground)
        points.push_back({{"image", {c.image.x(), c.image.y()}},
                          {"state_plane", {c.state.x(), c.state.y(), c.state.z()}}});
    doc["correspondence_points"] = points;
    auto verticals = nlohmann::ordered_json::array();
    for (const auto& seg : spec.verticals)
        verticals.push_back({{seg.bottom.x(), seg.bottom.y()}, {seg.top.x(), seg.top.y()}});
    doc["vertical_segments"] = verticals;
    auto elevated = nlohmann::ordered_json::array();
    for (const auto& c : spec.elevated)
        elevated.push_back({{"image", {c.image.x(), c.image.y()}},
                            {"state_plane", {c.state.x(), c.state.y(), c.state.z()}}});
    doc["height_correspondences"] = elevated;

    const auto matrix_to_json = [](const auto& m) {
        auto rows = nlohmann::ordered_json::array();
        for (int r = 0; r < m.rows(); ++r) {
            auto row = nlohmann::ordered_json::array();
            for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    doc["H"] = matrix_to_json(calib.homography.H);
    doc["H_inv"] = matrix_to_json(calib.homography.H_inv);
    doc["P"] = matrix_to_json(calib.projection.P);
    doc["vanishing_point"] = {calib.projection.vanishing_point.x(),
                              calib.projection.vanishing_point.y()};
    doc["h_residual_ft"] = calib.homography.residual_ft;
    doc["p_residual_px"] = calib.projection.residual_px;
    return doc.dump(2) + "\n";
}

}  // namespace trajlab
