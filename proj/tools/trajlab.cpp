// trajlab: trajectory dataset toolkit CLI. Every stage reads and writes
// plain JSON/CSV files; each run emits a JSON run-report with the resolved
// configuration and content hashes of its inputs.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajlab/associate.hpp"
#include "trajlab/camera.hpp"
#include "trajlab/dataset_io.hpp"
#include "trajlab/errors.hpp"
#include "trajlab/geometry.hpp"
#include "trajlab/macrofield.hpp"
#include "trajlab/quality.hpp"
#include "trajlab/raster.hpp"
#include "trajlab/reconcile.hpp"
#include "trajlab/resample.hpp"
#include "trajlab/synth.hpp"
#include "trajlab/trajectory.hpp"
#include "trajlab/waves.hpp"

namespace {

using nlohmann::ordered_json;
using namespace trajlab;

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    out << text;
}

std::string fnv1a_hash(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << hash;
    return out.str();
}

struct RunReport {
    std::string command;
    ordered_json config = ordered_json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    ordered_json results = ordered_json::object();

    void write(const std::string& explicit_path = "") const {
        ordered_json doc;
        doc["command"] = command;
        doc["config"] = config;
        ordered_json in = ordered_json::object();
        for (const std::string& path : inputs) {
            try {
                in[path] = fnv1a_hash(slurp_file(path));
            } catch (const DataError&) {
                in[path] = "unreadable";
            }
        }
        doc["inputs"] = in;
        doc["outputs"] = outputs;
        if (!results.empty()) doc["results"] = results;
        std::string path = explicit_path;
        if (path.empty())
            path = outputs.empty() ? command + ".run.json" : outputs[0] + ".run.json";
        spill_file(path, doc.dump(2) + "\n");
    }
};

int thread_count() {
    if (const char* env = std::getenv("TRAJLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// ---- subcommand bodies -------------------------------------------------

int run_validate(const std::string& input, const std::string& report_path) {
    const Dataset ds = parse_dataset(slurp_file(input));
    const ValidationReport report = validate_dataset(ds);
    RunReport run;
    run.command = "validate";
    run.config["input"] = input;
    run.inputs = {input};
    run.results["violations"] = report.violations.size();
    if (!report_path.empty()) {
        spill_file(report_path, write_validation_report(report));
        run.outputs.push_back(report_path);
    }
    run.write();
    std::cout << write_validation_report(report);
    if (!report.empty()) {
        std::cerr << "error: validation: " << report.summary() << "\n";
        return 2;
    }
    return 0;
}

int run_resample(const std::string& input, double rate, const std::string& output) {
    const Dataset ds = parse_dataset(slurp_file(input));
    std::vector<GapSpan> gaps;
    const Dataset out = resample_dataset(ds, rate, &gaps);
    spill_file(output, write_dataset(out));
    RunReport run;
    run.command = "resample";
    run.config["input"] = input;
    run.config["rate_hz"] = rate;
    run.inputs = {input};
    run.outputs = {output};
    ordered_json gap_list = ordered_json::array();
    for (const GapSpan& g : gaps) gap_list.push_back({{"t_begin", g.t_begin}, {"t_end", g.t_end}});
    run.results["gaps_over_half_second"] = gap_list;
    run.write();
    return 0;
}

int run_convert(const std::string& input, const std::string& geometry_file,
                const std::string& to, const std::string& output) {
    const RoadwayGeometry geom = RoadwayGeometry::fit(read_geometry_file(geometry_file));
    ordered_json out_doc = ordered_json::array();

    if (to == "stateplane") {
        const Dataset ds = parse_dataset(slurp_file(input));
        for (const Trajectory& t : ds.trajectories) {
            ordered_json rec;
            rec["_id"] = t.id;
            rec["timestamp"] = t.timestamps;
            std::vector<double> xs, ys;
            xs.reserve(t.size());
            ys.reserve(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) {
                RoadwayBox point{t.x_positions[i], t.y_positions[i], 0.0, 0.0, 0.0,
                                 t.direction};
                const Eigen::Vector3d c =
                    roadway_to_stateplane(point, geom).back_center();
                xs.push_back(c.x());
                ys.push_back(c.y());
            }
            rec["x_state"] = xs;
            rec["y_state"] = ys;
            out_doc.push_back(rec);
        }
    } else if (to == "roadway") {
        const nlohmann::json doc = nlohmann::json::parse(slurp_file(input));
        for (const auto& rec : doc) {
            ordered_json out_rec;
            out_rec["_id"] = rec.value("_id", std::string{});
            out_rec["timestamp"] = rec.at("timestamp");
            const auto xs = rec.at("x_state").get<std::vector<double>>();
            const auto ys = rec.at("y_state").get<std::vector<double>>();
            if (xs.size() != ys.size())
                throw SchemaError("x_state/y_state lengths differ", "x_state", -1);
            std::vector<double> xr, yr;
            xr.reserve(xs.size());
            yr.reserve(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) {
                StatePlaneBox point;
                const Eigen::Vector3d p(xs[i], ys[i], 0.0);
                point.bbl = point.bbr = point.btl = point.btr = p;
                point.fbl = point.fbr = point.ftl = point.ftr = p;
                const RoadwayBox rb = stateplane_to_roadway(point, geom);
                xr.push_back(rb.x);
                yr.push_back(rb.y);
            }
            out_rec["x_position"] = xr;
            out_rec["y_position"] = yr;
            out_doc.push_back(out_rec);
        }
    } else {
        throw DataError("convert target must be 'stateplane' or 'roadway'");
    }

    spill_file(output, out_doc.dump(2) + "\n");
    RunReport run;
    run.command = "convert";
    run.config["input"] = input;
    run.config["geometry"] = geometry_file;
    run.config["to"] = to;
    run.inputs = {input, geometry_file};
    run.outputs = {output};
    run.write();
    return 0;
}

int run_calibrate(const std::string& spec_file, const std::string& output) {
    const CalibrationSpec spec = read_calibration_file(spec_file);
    CameraCalibration calib;
    calib.homography = fit_homography(spec.ground);
    if (!spec.verticals.empty() && !spec.elevated.empty())
        calib.projection = fit_projection(calib.homography, spec.verticals, spec.elevated);
    spill_file(output, write_calibration(spec, calib));
    RunReport run;
    run.command = "calibrate";
    run.config["correspondences"] = spec_file;
    run.config["fit_projection"] = !spec.verticals.empty() && !spec.elevated.empty();
    run.inputs = {spec_file};
    run.outputs = {output};
    run.results["h_residual_ft"] = calib.homography.residual_ft;
    run.results["p_residual_px"] = calib.projection.residual_px;
    run.write();
    return 0;
}

int run_synth(const std::string& spec_file, const std::string& corrupt_file,
              const std::string& truth_out, const std::string& fragments_out,
              std::int64_t seed_override) {
    ScenarioSpec spec = read_scenario_file(spec_file);
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
    const Dataset truth = generate_scenario(spec);
    spill_file(truth_out, write_dataset(truth));

    RunReport run;
    run.command = "synth";
    run.config["spec"] = nlohmann::json::parse(slurp_file(spec_file));
    run.config["seed"] = spec.seed;
    run.inputs = {spec_file};
    run.outputs = {truth_out};
    run.results["vehicles"] = truth.trajectories.size();

    if (!corrupt_file.empty()) {
        if (fragments_out.empty())
            throw DataError("--corrupt requires a fragment output path (-O)");
        const CorruptionSpec corruption = read_corruption_file(corrupt_file);
        const FragmentSet fragments = corrupt(truth, corruption);
        spill_file(fragments_out, write_fragment_set(fragments));
        run.config["corrupt"] = nlohmann::json::parse(slurp_file(corrupt_file));
        run.inputs.push_back(corrupt_file);
        run.outputs.push_back(fragments_out);
        run.results["fragments"] = fragments.fragments.size();
        run.results["deleted_samples"] = fragments.deletions.size();
    }
    run.write();
    return 0;
}

int run_reconcile(const std::string& input, const std::string& weights_file,
                  const std::string& gating_file, const std::string& output,
                  const std::string& report_path) {
    const FragmentSet set = parse_fragment_set(slurp_file(input));
    std::vector<Trajectory> fragments;
    fragments.reserve(set.fragments.size());
    for (const auto& f : set.fragments) fragments.push_back(f.trajectory);

    GatingParams gating;
    if (!gating_file.empty()) gating = read_gating_file(gating_file);
    ReconciliationWeights weights;
    if (!weights_file.empty()) weights = read_weights_file(weights_file);

    const AssociationResult assoc = associate_and_stitch(fragments, gating);

    // Reconciliation is independent per trajectory; shard across threads.
    Dataset out;
    out.trajectories.resize(assoc.stitched.size());
    std::vector<ordered_json> objectives(assoc.stitched.size());
    const int threads = std::min<int>(thread_count(),
                                      std::max<std::size_t>(1, assoc.stitched.size()));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> cursor{0};
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= assoc.stitched.size()) break;
                const Trajectory& stitched = assoc.stitched[i];
                const Trajectory rec = reconcile_trajectory(stitched, weights);
                const double dt = stitched.timestamps.size() > 1
                                      ? stitched.timestamps[1] - stitched.timestamps[0]
                                      : kGridStep;
                ordered_json obj;
                obj["x_before"] = reconciliation_objective(stitched.x_positions,
                                                           stitched.x_positions, dt,
                                                           weights);
                obj["x_after"] = reconciliation_objective(rec.x_positions,
                                                          stitched.x_positions, dt,
                                                          weights);
                objectives[i] = std::move(obj);
                out.trajectories[i] = rec;
            }
        });
    }
    for (auto& t : pool) t.join();

    spill_file(output, write_dataset(out));

    ordered_json chains = ordered_json::array();
    for (const auto& chain : assoc.chains) {
        ordered_json ids = ordered_json::array();
        for (std::size_t idx : chain) ids.push_back(fragments[idx].id);
        chains.push_back(ids);
    }
    RunReport run;
    run.command = "reconcile";
    run.config["input"] = input;
    run.config["gating"] = {{"max_gap_s", gating.max_gap_s},
                            {"max_prediction_error_ft", gating.max_prediction_error_ft},
                            {"max_lateral_offset_ft", gating.max_lateral_offset_ft},
                            {"weight_gap", gating.weight_gap},
                            {"weight_prediction", gating.weight_prediction},
                            {"weight_lateral", gating.weight_lateral},
                            {"weight_dimension", gating.weight_dimension},
                            {"entry_cost", gating.entry_cost},
                            {"exit_cost", gating.exit_cost}};
    run.config["weights"] = {{"perturbation", weights.perturbation},
                             {"accel", weights.accel},
                             {"jerk", weights.jerk}};
    run.inputs = {input};
    if (!weights_file.empty()) run.inputs.push_back(weights_file);
    if (!gating_file.empty()) run.inputs.push_back(gating_file);
    run.outputs = {output};
    run.results["chains"] = chains;
    run.results["objectives"] = objectives;
    run.results["flow_cost"] = assoc.flow_cost;
    run.results["fragments_per_chain"] = fragmentation_rate(assoc.chains);
    run.write(report_path);
    return 0;
}

int run_aggregate(const std::string& input, const EdieOptions& options,
                  const std::string& output) {
    const Dataset ds = parse_dataset(slurp_file(input));
    const MacroField field = edie_field(ds, options);
    spill_file(output, write_field_csv(field));
    RunReport run;
    run.command = "aggregate";
    run.config["input"] = input;
    run.config["dx"] = options.dx;
    run.config["dt"] = options.dt;
    if (options.direction) run.config["direction"] = *options.direction;
    if (options.lane) run.config["lane"] = *options.lane;
    run.config["lane_width_ft"] = options.lane_width_ft;
    run.inputs = {input};
    run.outputs = {output};
    run.results["nonempty_bins"] = [&] {
        std::size_t count = 0;
        for (int ix = 0; ix < field.nx; ++ix)
            for (int it = 0; it < field.nt; ++it)
                if (!field.empty_bin(ix, it)) ++count;
        return count;
    }();
    run.write();
    return 0;
}

int run_tsdiagram(const std::string& input, double dx, double dt, double vmax,
                  bool splat, const std::string& output, const std::string& csv_out) {
    const Dataset ds = parse_dataset(slurp_file(input));
    RasterOptions options;
    options.vmax_ftps = vmax;
    options.dx = dx;
    options.dt = dt;
    Raster raster;
    if (splat) {
        raster = raster_timespace(ds, options);
    } else {
        EdieOptions edie;
        edie.dx = dx;
        edie.dt = dt;
        raster = raster_timespace(edie_field(ds, edie), options);
    }
    write_png(output, raster);
    RunReport run;
    run.command = "tsdiagram";
    run.config["input"] = input;
    run.config["dx"] = dx;
    run.config["dt"] = dt;
    run.config["vmax_ftps"] = vmax;
    run.config["splat"] = splat;
    run.inputs = {input};
    run.outputs = {output};
    if (!csv_out.empty()) {
        spill_file(csv_out, write_raster_csv(raster));
        run.outputs.push_back(csv_out);
    }
    run.write();
    return 0;
}

int run_waves_speed(const std::string& field_csv, std::size_t pairs, std::uint64_t seed,
                    double min_sep, double max_lag, const std::string& output) {
    const MacroField field = read_field_csv_file(field_csv);
    WaveDistributionOptions options;
    options.min_separation_ft = min_sep;
    options.crosscorr.max_lag_s = max_lag;
    const WaveSpeedDistribution dist = wave_speed_distribution(field, pairs, seed, options);
    ordered_json doc;
    doc["mean_mph"] = dist.mean_mph;
    doc["std_mph"] = dist.std_mph;
    doc["pairs_used"] = dist.pairs_used;
    doc["pairs_dropped"] = dist.pairs_dropped;
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    RunReport run;
    run.command = "waves-speed";
    run.config["field"] = field_csv;
    run.config["pairs"] = pairs;
    run.config["seed"] = seed;
    run.config["min_separation_ft"] = min_sep;
    run.config["max_lag_s"] = max_lag;
    run.inputs = {field_csv};
    run.results = doc;
    if (!output.empty()) {
        spill_file(output, text);
        run.outputs.push_back(output);
    }
    run.write();
    return 0;
}

int run_waves_cwt(const std::string& field_csv, double x_location, std::size_t scale_count,
                  double period_min, double period_max, double window_begin,
                  double window_end, const std::string& output) {
    const MacroField field = read_field_csv_file(field_csv);
    const SpeedSeries series = extract_speed_series(field, x_location);
    const std::vector<double> scales =
        log_scales_for_periods(period_min * 60.0, period_max * 60.0, scale_count);
    const Scaleogram sg = cwt_morlet(series, scales);
    spill_file(output, write_scaleogram_csv(sg));

    RunReport run;
    run.command = "waves-cwt";
    run.config["field"] = field_csv;
    run.config["x"] = x_location;
    run.config["scales"] = scale_count;
    run.config["period_min_minutes"] = period_min;
    run.config["period_max_minutes"] = period_max;
    run.inputs = {field_csv};
    run.outputs = {output};
    if (window_end > window_begin) {
        const DominantPeriodResult peak = dominant_period(sg, window_begin, window_end);
        run.results["dominant_period_min"] = peak.period_min;
        run.results["peak_to_median"] = peak.peak_to_median;
        std::cout << "dominant_period_min " << peak.period_min << "\n";
    }
    run.write();
    return 0;
}

int run_metrics(const std::string& pred_file, const std::string& gt_file, double iou_min,
                const std::string& output) {
    const Dataset pred = parse_dataset(slurp_file(pred_file));
    const Dataset gt = parse_dataset(slurp_file(gt_file));
    MetricsSummary summary = evaluate_tracking(pred, gt, iou_min);
    const MetricsSummary feas = feasibility_metrics(pred);
    summary.feasible_accel = feas.feasible_accel;
    summary.feasible_heading = feas.feasible_heading;
    summary.feasible_direction = feas.feasible_direction;
    summary.feasible_no_overlap = feas.feasible_no_overlap;
    spill_file(output, write_metrics_json(summary));
    RunReport run;
    run.command = "metrics";
    run.config["pred"] = pred_file;
    run.config["gt"] = gt_file;
    run.config["iou_min"] = iou_min;
    run.inputs = {pred_file, gt_file};
    run.outputs = {output};
    run.results["mota"] = summary.mota;
    run.write();
    return 0;
}

int run_artifacts(const std::string& field_csv, const std::string& output) {
    const MacroField field = read_field_csv_file(field_csv);
    const std::vector<DetectedBand> bands = detect_missing_bands(field);
    spill_file(output, write_bands_json(bands));
    RunReport run;
    run.command = "artifacts";
    run.config["field"] = field_csv;
    run.inputs = {field_csv};
    run.outputs = {output};
    run.results["bands"] = bands.size();
    run.write();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajlab: freeway trajectory dataset toolkit"};
    app.require_subcommand(1);

    // validate
    std::string v_input, v_report;
    auto* validate_cmd = app.add_subcommand("validate", "check a dataset file");
    validate_cmd->add_option("file", v_input)->required();
    validate_cmd->add_option("--report", v_report, "violation report JSON path");

    // resample
    std::string r_input, r_output;
    double r_rate = 25.0;
    auto* resample_cmd = app.add_subcommand("resample", "resample onto the 25 Hz grid");
    resample_cmd->add_option("file", r_input)->required();
    resample_cmd->add_option("--rate", r_rate, "target rate in Hz");
    resample_cmd->add_option("-o,--output", r_output)->required();

    // convert
    std::string c_input, c_geometry, c_to = "stateplane", c_output;
    auto* convert_cmd = app.add_subcommand("convert", "roadway <-> state plane");
    convert_cmd->add_option("file", c_input)->required();
    convert_cmd->add_option("--geometry", c_geometry)->required();
    convert_cmd->add_option("--to", c_to, "stateplane or roadway");
    convert_cmd->add_option("-o,--output", c_output)->required();

    // calibrate
    std::string k_spec, k_output;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "fit camera homography/projection");
    calibrate_cmd->add_option("--correspondences", k_spec)->required();
    calibrate_cmd->add_option("-o,--output", k_output)->required();

    // synth
    std::string s_spec, s_corrupt, s_truth, s_fragments;
    std::int64_t s_seed = -1;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario");
    synth_cmd->add_option("--spec", s_spec)->required();
    synth_cmd->add_option("--corrupt", s_corrupt, "corruption spec JSON");
    synth_cmd->add_option("-o,--output", s_truth, "ground-truth dataset path")->required();
    synth_cmd->add_option("-O,--fragments", s_fragments, "corrupted fragment set path");
    synth_cmd->add_option("--seed", s_seed, "override the spec seed");

    // reconcile
    std::string x_input, x_weights, x_gating, x_output, x_report;
    auto* reconcile_cmd = app.add_subcommand("reconcile", "associate, stitch and smooth");
    reconcile_cmd->add_option("file", x_input)->required();
    reconcile_cmd->add_option("--weights", x_weights);
    reconcile_cmd->add_option("--gating", x_gating);
    reconcile_cmd->add_option("-o,--output", x_output)->required();
    reconcile_cmd->add_option("--report", x_report);

    // aggregate
    std::string a_input, a_output;
    EdieOptions a_options;
    int a_direction = 0, a_lane = 0;
    auto* aggregate_cmd = app.add_subcommand("aggregate", "Edie macroscopic field");
    aggregate_cmd->add_option("file", a_input)->required();
    aggregate_cmd->add_option("--dx", a_options.dx, "bin length, ft");
    aggregate_cmd->add_option("--dt", a_options.dt, "bin duration, s");
    aggregate_cmd->add_option("--direction", a_direction, "-1 or +1 filter");
    aggregate_cmd->add_option("--lane", a_lane, "1-based lane filter");
    aggregate_cmd->add_option("--lane-width", a_options.lane_width_ft);
    aggregate_cmd->add_option("-o,--output", a_output)->required();

    // tsdiagram
    std::string t_input, t_output, t_csv;
    double t_dx = 100.0, t_dt = 30.0, t_vmax = 120.0;
    bool t_splat = false;
    auto* tsdiagram_cmd = app.add_subcommand("tsdiagram", "time-space speed raster");
    tsdiagram_cmd->add_option("file", t_input)->required();
    tsdiagram_cmd->add_option("--dx", t_dx);
    tsdiagram_cmd->add_option("--dt", t_dt);
    tsdiagram_cmd->add_option("--vmax", t_vmax, "color map ceiling, ft/s");
    tsdiagram_cmd->add_flag("--splat", t_splat, "splat samples instead of Edie bins");
    tsdiagram_cmd->add_option("-o,--output", t_output, "PNG path")->required();
    tsdiagram_cmd->add_option("--csv", t_csv, "speed grid CSV path");

    // waves
    auto* waves_cmd = app.add_subcommand("waves", "wave analytics");
    waves_cmd->require_subcommand(1);
    std::string ws_field, ws_output;
    std::size_t ws_pairs = 20;
    std::uint64_t ws_seed = 7;
    double ws_min_sep = 500.0, ws_max_lag = 600.0;
    auto* waves_speed_cmd = waves_cmd->add_subcommand("speed", "propagation speed");
    waves_speed_cmd->add_option("field", ws_field)->required();
    waves_speed_cmd->add_option("--pairs", ws_pairs);
    waves_speed_cmd->add_option("--seed", ws_seed);
    waves_speed_cmd->add_option("--min-sep", ws_min_sep);
    waves_speed_cmd->add_option("--max-lag", ws_max_lag);
    waves_speed_cmd->add_option("-o,--output", ws_output);

    std::string wc_field, wc_output;
    double wc_x = 0.0, wc_period_min = 1.0, wc_period_max = 20.0;
    double wc_window_begin = 0.0, wc_window_end = 0.0;
    std::size_t wc_scales = 64;
    auto* waves_cwt_cmd = waves_cmd->add_subcommand("cwt", "Morlet scaleogram");
    waves_cwt_cmd->add_option("field", wc_field)->required();
    waves_cwt_cmd->add_option("--x", wc_x, "location, roadway ft")->required();
    waves_cwt_cmd->add_option("--scales", wc_scales, "number of log-spaced scales");
    waves_cwt_cmd->add_option("--period-min", wc_period_min, "minutes");
    waves_cwt_cmd->add_option("--period-max", wc_period_max, "minutes");
    waves_cwt_cmd->add_option("--window-begin", wc_window_begin, "seconds");
    waves_cwt_cmd->add_option("--window-end", wc_window_end, "seconds");
    waves_cwt_cmd->add_option("-o,--output", wc_output)->required();

    // metrics
    std::string m_pred, m_gt, m_output;
    double m_iou = 0.1;
    auto* metrics_cmd = app.add_subcommand("metrics", "tracking metrics vs ground truth");
    metrics_cmd->add_option("--pred", m_pred)->required();
    metrics_cmd->add_option("--gt", m_gt)->required();
    metrics_cmd->add_option("--iou-min", m_iou);
    metrics_cmd->add_option("-o,--output", m_output)->required();

    // artifacts
    std::string f_field, f_output;
    auto* artifacts_cmd = app.add_subcommand("artifacts", "detect missing-data bands");
    artifacts_cmd->add_option("field", f_field)->required();
    artifacts_cmd->add_option("-o,--output", f_output)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (*validate_cmd) return run_validate(v_input, v_report);
        if (*resample_cmd) return run_resample(r_input, r_rate, r_output);
        if (*convert_cmd) return run_convert(c_input, c_geometry, c_to, c_output);
        if (*calibrate_cmd) return run_calibrate(k_spec, k_output);
        if (*synth_cmd) return run_synth(s_spec, s_corrupt, s_truth, s_fragments, s_seed);
        if (*reconcile_cmd)
            return run_reconcile(x_input, x_weights, x_gating, x_output, x_report);
        if (*aggregate_cmd) {
            if (a_direction != 0) a_options.direction = a_direction;
            if (a_lane != 0) a_options.lane = a_lane;
            return run_aggregate(a_input, a_options, a_output);
        }
        if (*tsdiagram_cmd)
            return run_tsdiagram(t_input, t_dx, t_dt, t_vmax, t_splat, t_output, t_csv);
        if (*waves_speed_cmd)
            return run_waves_speed(ws_field, ws_pairs, ws_seed, ws_min_sep, ws_max_lag,
                                   ws_output);
        if (*waves_cwt_cmd)
            return run_waves_cwt(wc_field, wc_x, wc_scales, wc_period_min, wc_period_max,
                                 wc_window_begin, wc_window_end, wc_output);
        if (*metrics_cmd) return run_metrics(m_pred, m_gt, m_iou, m_output);
        if (*artifacts_cmd) return run_artifacts(f_field, f_output);
    } catch (const DataError& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: convergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
