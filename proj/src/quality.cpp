#include "trajlab/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trajlab/errors.hpp"
#include "trajlab/mincostflow.hpp"
#include "trajlab/resample.hpp"

namespace trajlab {

namespace {

struct Interval {
    double lo, hi;
};

Interval x_interval(const Footprint& f) {
    return f.direction >= 0 ? Interval{f.x, f.x + f.length}
                            : Interval{f.x - f.length, f.x};
}

double overlap_1d(const Interval& a, const Interval& b) {
    return std::max(0.0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo));
}

}  // namespace

double footprint_iou(const Footprint& a, const Footprint& b) {
    const double area_a = a.length * a.width;
    const double area_b = b.length * b.width;
    if (area_a <= 0.0 || area_b <= 0.0) {
        const bool identical_points = area_a <= 0.0 && area_b <= 0.0 && a.x == b.x &&
                                      a.y == b.y && a.length == b.length &&
                                      a.width == b.width;
        return identical_points ? 1.0 : 0.0;
    }
    const double ix = overlap_1d(x_interval(a), x_interval(b));
    const double iy = overlap_1d({a.y - 0.5 * a.width, a.y + 0.5 * a.width},
                                 {b.y - 0.5 * b.width, b.y + 0.5 * b.width});
    const double inter = ix * iy;
    return inter / (area_a + area_b - inter);
}

TimestepMatch match_timestep(const std::vector<Footprint>& pred,
                             const std::vector<Footprint>& gt, double iou_min,
                             const std::vector<MatchPair>& previous) {
    TimestepMatch result;
    std::vector<bool> pred_used(pred.size(), false), gt_used(gt.size(), false);

    // Continuity pass: keep surviving previous pairs before re-solving.
    for (const MatchPair& p : previous) {
        if (p.pred_index >= pred.size() || p.gt_index >= gt.size()) continue;
        if (pred_used[p.pred_index] || gt_used[p.gt_index]) continue;
        const double iou = footprint_iou(pred[p.pred_index], gt[p.gt_index]);
        if (iou >= iou_min) {
            result.pairs.push_back({p.pred_index, p.gt_index, iou});
            pred_used[p.pred_index] = true;
            gt_used[p.gt_index] = true;
        }
    }

    // Max-total-IOU assignment over the remainder (exact, via min-cost flow
    // with negated weights).
    std::vector<std::size_t> free_pred, free_gt;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (!pred_used[i]) free_pred.push_back(i);
    for (std::size_t j = 0; j < gt.size(); ++j)
        if (!gt_used[j]) free_gt.push_back(j);

    if (!free_pred.empty() && !free_gt.empty()) {
        MinCostFlow flow(free_pred.size() + free_gt.size() + 2);
        const std::size_t source = free_pred.size() + free_gt.size();
        const std::size_t sink = source + 1;
        struct EdgeRef {
            std::size_t arc, pred, gt;
            double iou;
        };
        std::vector<EdgeRef> refs;
        for (std::size_t i = 0; i < free_pred.size(); ++i)
            flow.add_arc(source, i, 1, 0.0);
        for (std::size_t j = 0; j < free_gt.size(); ++j)
            flow.add_arc(free_pred.size() + j, sink, 1, 0.0);
        for (std::size_t i = 0; i < free_pred.size(); ++i)
            for (std::size_t j = 0; j < free_gt.size(); ++j) {
                const double iou = footprint_iou(pred[free_pred[i]], gt[free_gt[j]]);
                if (iou >= iou_min && iou > 0.0)
                    refs.push_back({flow.add_arc(i, free_pred.size() + j, 1, -iou),
                                    free_pred[i], free_gt[j], iou});
            }
        flow.solve(source, sink);
        for (const EdgeRef& ref : refs)
            if (flow.arc_flow(ref.arc) > 0) {
                result.pairs.push_back({ref.pred, ref.gt, ref.iou});
                pred_used[ref.pred] = true;
                gt_used[ref.gt] = true;
            }
    }

    for (std::size_t i = 0; i < pred.size(); ++i)
        if (!pred_used[i]) result.unmatched_pred.push_back(i);
    for (std::size_t j = 0; j < gt.size(); ++j)
        if (!gt_used[j]) result.unmatched_gt.push_back(j);
    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const MatchPair& a, const MatchPair& b) {
                  return a.pred_index < b.pred_index;
              });
    return result;
}

namespace {

struct FrameEntry {
    std::size_t traj_index;
    Footprint footprint;
    double x_raw, y_raw;
};

std::map<long long, std::vector<FrameEntry>> frames_of(const Dataset& dataset) {
    std::map<long long, std::vector<FrameEntry>> frames;
    for (std::size_t k = 0; k < dataset.trajectories.size(); ++k) {
        const Trajectory& t = dataset.trajectories[k];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const long long step = std::llround(t.timestamps[i] * kGridHz);
            Footprint f;
            f.x = t.x_positions[i];
            f.y = t.y_positions[i];
            f.length = t.length;
            f.width = t.width;
            f.direction = t.direction;
            frames[step].push_back({k, f, t.x_positions[i], t.y_positions[i]});
        }
    }
    return frames;
}

void fill_error_block(MetricsSummary& out, const std::vector<MatchedState>& pairs) {
    const auto stats = [&](auto getter, double& mean, double& stdev, double& mae) {
        double sum = 0.0, sum_abs = 0.0;
        for (const MatchedState& p : pairs) {
            const double e = getter(p);
            sum += e;
            sum_abs += std::abs(e);
        }
        mean = sum / static_cast<double>(pairs.size());
        mae = sum_abs / static_cast<double>(pairs.size());
        double var = 0.0;
        for (const MatchedState& p : pairs) {
            const double e = getter(p) - mean;
            var += e * e;
        }
        stdev = std::sqrt(var / static_cast<double>(pairs.size()));
    };
    stats([](const MatchedState& p) { return p.pred_x - p.gt_x; }, out.x_error_mean,
          out.x_error_std, out.x_error_mae);
    stats([](const MatchedState& p) { return p.pred_y - p.gt_y; }, out.y_error_mean,
          out.y_error_std, out.y_error_mae);
    stats([](const MatchedState& p) { return p.pred_length - p.gt_length; },
          out.length_error_mean, out.length_error_std, out.length_error_mae);
    stats([](const MatchedState& p) { return p.pred_width - p.gt_width; },
          out.width_error_mean, out.width_error_std, out.width_error_mae);
    stats([](const MatchedState& p) { return p.pred_height - p.gt_height; },
          out.height_error_mean, out.height_error_std, out.height_error_mae);
    std::size_t in1 = 0, in3 = 0;
    for (const MatchedState& p : pairs) {
        const double d = std::hypot(p.pred_x - p.gt_x, p.pred_y - p.gt_y);
        if (d < 1.0) ++in1;
        if (d < 3.0) ++in3;
    }
    out.within_1ft = static_cast<double>(in1) / static_cast<double>(pairs.size());
    out.within_3ft = static_cast<double>(in3) / static_cast<double>(pairs.size());
}

}  // namespace

MetricsSummary positional_error_stats(const std::vector<MatchedState>& pairs) {
    if (pairs.empty()) throw DataError("positional error statistics undefined: no matches");
    MetricsSummary out;
    fill_error_block(out, pairs);
    return out;
}

MetricsSummary evaluate_tracking(const Dataset& predicted, const Dataset& ground_truth,
                                 double iou_min) {
    const auto pred_frames = frames_of(predicted);
    const auto gt_frames = frames_of(ground_truth);

    std::size_t gt_positions = 0;
    for (const auto& [step, list] : gt_frames) gt_positions += list.size();
    if (gt_positions == 0) throw DataError("tracking metrics undefined: no GT positions");

    MotCounts counts;
    counts.gt_positions = gt_positions;
    std::map<std::size_t, std::size_t> last_pred_of_gt;  // gt traj -> pred traj
    std::map<std::size_t, std::size_t> gt_matched_positions, pred_matched_positions;
    std::set<long long> steps;
    for (const auto& [step, list] : pred_frames) steps.insert(step);
    for (const auto& [step, list] : gt_frames) steps.insert(step);

    std::vector<MatchedState> matched_states;

    for (long long step : steps) {
        const auto pit = pred_frames.find(step);
        const auto git = gt_frames.find(step);
        const std::vector<FrameEntry> empty;
        const std::vector<FrameEntry>& preds = pit != pred_frames.end() ? pit->second : empty;
        const std::vector<FrameEntry>& gts = git != gt_frames.end() ? git->second : empty;

        std::vector<Footprint> pred_boxes, gt_boxes;
        pred_boxes.reserve(preds.size());
        gt_boxes.reserve(gts.size());
        for (const auto& e : preds) pred_boxes.push_back(e.footprint);
        for (const auto& e : gts) gt_boxes.push_back(e.footprint);

        // continuity preference from trajectory-level previous matches
        std::vector<MatchPair> previous;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            const auto it = last_pred_of_gt.find(gts[j].traj_index);
            if (it == last_pred_of_gt.end()) continue;
            for (std::size_t i = 0; i < preds.size(); ++i)
                if (preds[i].traj_index == it->second) {
                    previous.push_back({i, j, 0.0});
                    break;
                }
        }

        const TimestepMatch match = match_timestep(pred_boxes, gt_boxes, iou_min, previous);
        counts.true_positives += match.pairs.size();
        counts.false_positives += match.unmatched_pred.size();
        counts.false_negatives += match.unmatched_gt.size();
        for (const MatchPair& p : match.pairs) {
            counts.matched_iou_sum += p.iou;
            const std::size_t gt_traj = gts[p.gt_index].traj_index;
            const std::size_t pred_traj = preds[p.pred_index].traj_index;
            const auto it = last_pred_of_gt.find(gt_traj);
            if (it != last_pred_of_gt.end() && it->second != pred_traj)
                ++counts.id_switches;
            last_pred_of_gt[gt_traj] = pred_traj;
            ++gt_matched_positions[gt_traj];
            ++pred_matched_positions[pred_traj];

            MatchedState state;
            state.pred_x = preds[p.pred_index].x_raw;
            state.pred_y = preds[p.pred_index].y_raw;
            state.pred_length = predicted.trajectories[pred_traj].length;
            state.pred_width = predicted.trajectories[pred_traj].width;
            state.pred_height = predicted.trajectories[pred_traj].height;
            state.gt_x = gts[p.gt_index].x_raw;
            state.gt_y = gts[p.gt_index].y_raw;
            state.gt_length = ground_truth.trajectories[gt_traj].length;
            state.gt_width = ground_truth.trajectories[gt_traj].width;
            state.gt_height = ground_truth.trajectories[gt_traj].height;
            matched_states.push_back(state);
        }
    }

    MetricsSummary out;
    out.counts = counts;
    const double events = static_cast<double>(counts.false_negatives +
                                              counts.false_positives +
                                              counts.id_switches);
    out.mota = 1.0 - events / static_cast<double>(counts.gt_positions);
    out.motp_iou = counts.true_positives > 0
                       ? counts.matched_iou_sum / static_cast<double>(counts.true_positives)
                       : 0.0;
    const double tp = static_cast<double>(counts.true_positives);
    out.precision = tp + counts.false_positives > 0
                        ? tp / (tp + static_cast<double>(counts.false_positives))
                        : 0.0;
    out.recall = tp / static_cast<double>(counts.gt_positions);

    std::size_t gt_matched_trajs = 0;
    double per_gt_sum = 0.0;
    for (std::size_t k = 0; k < ground_truth.trajectories.size(); ++k) {
        const auto it = gt_matched_positions.find(k);
        const std::size_t matched = it == gt_matched_positions.end() ? 0 : it->second;
        if (matched > 0) ++gt_matched_trajs;
        per_gt_sum += static_cast<double>(matched) /
                      static_cast<double>(ground_truth.trajectories[k].size());
    }
    std::size_t pred_matched_trajs = 0;
    double per_pred_sum = 0.0;
    for (std::size_t k = 0; k < predicted.trajectories.size(); ++k) {
        const auto it = pred_matched_positions.find(k);
        const std::size_t matched = it == pred_matched_positions.end() ? 0 : it->second;
        if (matched > 0) ++pred_matched_trajs;
        per_pred_sum += static_cast<double>(matched) /
                        static_cast<double>(predicted.trajectories[k].size());
    }
    if (!ground_truth.trajectories.empty()) {
        out.gt_match_rate = static_cast<double>(gt_matched_trajs) /
                            static_cast<double>(ground_truth.trajectories.size());
        out.per_gt_recall = per_gt_sum /
                            static_cast<double>(ground_truth.trajectories.size());
    }
    if (!predicted.trajectories.empty()) {
        out.pred_match_rate = static_cast<double>(pred_matched_trajs) /
                              static_cast<double>(predicted.trajectories.size());
        out.per_pred_precision = per_pred_sum /
                                 static_cast<double>(predicted.trajectories.size());
    }
    if (!matched_states.empty()) fill_error_block(out, matched_states);
    return out;
}

MetricsSummary feasibility_metrics(const Dataset& dataset,
                                   const FeasibilityThresholds& thresholds) {
    MetricsSummary out;
    std::size_t accel_total = 0, accel_ok = 0;
    std::size_t heading_total = 0, heading_ok = 0;
    std::size_t direction_total = 0, direction_ok = 0;
    const double heading_limit = thresholds.max_heading_deg * M_PI / 180.0;

    for (const Trajectory& t : dataset.trajectories) {
        if (t.size() < 3) continue;
        const std::vector<double> accel = finite_difference(t, 2);
        for (double a : accel) {
            ++accel_total;
            if (std::abs(a) < thresholds.max_accel_ftps2) ++accel_ok;
        }
        for (std::size_t i = 0; i + 1 < t.size(); ++i) {
            const double dx = t.x_positions[i + 1] - t.x_positions[i];
            const double dy = t.y_positions[i + 1] - t.y_positions[i];
            ++heading_total;
            if (std::abs(std::atan2(dy, std::abs(dx))) < heading_limit) ++heading_ok;
            ++direction_total;
            if (dx * t.direction >= 0.0) ++direction_ok;
        }
    }
    out.feasible_accel = accel_total ? static_cast<double>(accel_ok) / accel_total : 1.0;
    out.feasible_heading =
        heading_total ? static_cast<double>(heading_ok) / heading_total : 1.0;
    out.feasible_direction =
        direction_total ? static_cast<double>(direction_ok) / direction_total : 1.0;

    // Overlap: trajectories that ever share a grid timestep with another
    // footprint at IOU > 0.
    const auto frames = frames_of(dataset);
    std::set<std::size_t> overlapping;
    for (const auto& [step, list] : frames) {
        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t j = i + 1; j < list.size(); ++j) {
                if (footprint_iou(list[i].footprint, list[j].footprint) > 0.0) {
                    overlapping.insert(list[i].traj_index);
                    overlapping.insert(list[j].traj_index);
                }
            }
    }
    const std::size_t n = dataset.trajectories.size();
    out.feasible_no_overlap =
        n ? static_cast<double>(n - overlapping.size()) / static_cast<double>(n) : 1.0;
    return out;
}

std::vector<DetectedBand> detect_missing_bands(const MacroField& field,
                                               const BandDetectionOptions& options) {
    std::vector<DetectedBand> bands;
    std::vector<bool> visited(static_cast<std::size_t>(field.nx) * field.nt, false);
    const auto idx = [&](int ix, int it) {
        return static_cast<std::size_t>(ix) * field.nt + it;
    };

    for (int ix = 0; ix < field.nx; ++ix) {
        for (int it = 0; it < field.nt; ++it) {
            if (visited[idx(ix, it)] || !field.empty_bin(ix, it)) continue;
            // BFS over the 4-connected empty component
            std::vector<std::pair<int, int>> stack{{ix, it}};
            visited[idx(ix, it)] = true;
            int ix_min = ix, ix_max = ix, it_min = it, it_max = it;
            std::set<int> time_columns;
            while (!stack.empty()) {
                const auto [cx, ct] = stack.back();
                stack.pop_back();
                ix_min = std::min(ix_min, cx);
                ix_max = std::max(ix_max, cx);
                it_min = std::min(it_min, ct);
                it_max = std::max(it_max, ct);
                time_columns.insert(ct);
                const int nbr[4][2] = {{cx - 1, ct}, {cx + 1, ct}, {cx, ct - 1},
                                       {cx, ct + 1}};
                for (const auto& nb : nbr) {
                    if (!field.in_grid(nb[0], nb[1])) continue;
                    if (visited[idx(nb[0], nb[1])] || !field.empty_bin(nb[0], nb[1]))
                        continue;
                    visited[idx(nb[0], nb[1])] = true;
                    stack.push_back({nb[0], nb[1]});
                }
            }
            DetectedBand band;
            band.x_begin = field.x0 + field.dx * ix_min;
            band.x_end = field.x0 + field.dx * (ix_max + 1);
            const double time_coverage =
                static_cast<double>(time_columns.size()) / static_cast<double>(field.nt);
            if (time_coverage >= options.time_span_fraction) {
                band.kind = (band.x_end - band.x_begin) >= options.pole_min_width_ft
                                ? BandKind::MissingPole
                                : BandKind::Overpass;
                band.t_begin = field.t0;
                band.t_end = field.t0 + field.dt * field.nt;
            } else {
                band.kind = BandKind::PacketDrop;
                band.t_begin = field.t0 + field.dt * it_min;
                band.t_end = field.t0 + field.dt * (it_max + 1);
            }
            bands.push_back(band);
        }
    }
    std::sort(bands.begin(), bands.end(), [](const DetectedBand& a, const DetectedBand& b) {
        if (a.x_begin != b.x_begin) return a.x_begin < b.x_begin;
        return a.t_begin < b.t_begin;
    });
    return bands;
}

double fragmentation_rate(const std::vector<std::vector<std::size_t>>& chains) {
    if (chains.empty()) return 0.0;
    std::size_t fragments = 0;
    for (const auto& chain : chains) fragments += chain.size();
    return static_cast<double>(fragments) / static_cast<double>(chains.size());
}

std::string write_metrics_json(const MetricsSummary& m) {
    nlohmann::ordered_json doc;
    doc["tracking"] = {{"mota", m.mota},
                       {"motp_iou", m.motp_iou},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"gt_match_rate", m.gt_match_rate},
                       {"pred_match_rate", m.pred_match_rate},
                       {"per_gt_recall", m.per_gt_recall},
                       {"per_pred_precision", m.per_pred_precision}};
    doc["feasibility"] = {{"accel", m.feasible_accel},
                          {"heading", m.feasible_heading},
                          {"direction", m.feasible_direction},
                          {"no_overlap", m.feasible_no_overlap}};
    doc["errors"] = {
        {"x", {{"mean", m.x_error_mean}, {"std", m.x_error_std}, {"mae", m.x_error_mae}}},
        {"y", {{"mean", m.y_error_mean}, {"std", m.y_error_std}, {"mae", m.y_error_mae}}},
        {"length",
         {{"mean", m.length_error_mean},
          {"std", m.length_error_std},
          {"mae", m.length_error_mae}}},
        {"width",
         {{"mean", m.width_error_mean},
          {"std", m.width_error_std},
          {"mae", m.width_error_mae}}},
        {"height",
         {{"mean", m.height_error_mean},
          {"std", m.height_error_std},
          {"mae", m.height_error_mae}}},
        {"within_1ft", m.within_1ft},
        {"within_3ft", m.within_3ft}};
    doc["counts"] = {{"tp", m.counts.true_positives},
                     {"fp", m.counts.false_positives},
                     {"fn", m.counts.false_negatives},
                     {"id_switches", m.counts.id_switches},
                     {"gt_positions", m.counts.gt_positions}};
    return doc.dump(2) + "\n";
}

std::string write_bands_json(const std::vector<DetectedBand>& bands) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const DetectedBand& b : bands) {
        const char* kind = b.kind == BandKind::MissingPole
                               ? "missing_pole"
                               : (b.kind == BandKind::Overpass ? "overpass"
                                                               : "packet_drop");
        doc.push_back({{"kind", kind},
                       {"x", {b.x_begin, b.x_end}},
                       {"t", {b.t_begin, b.t_end}}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace trajlab
