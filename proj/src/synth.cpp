#include "trajlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

constexpr double kMinGap = 1.0;  // ft, front bumper to leader back bumper

// Uniform (0,1] double from the engine; hand-rolled transforms below keep
// output byte-identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

double exponential(std::mt19937_64& rng, double rate) {
    return -std::log(uniform01(rng)) / rate;
}

double gaussian(std::mt19937_64& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string fresh_hex_id(std::mt19937_64& rng) {
    static const char* hex = "0123456789abcedf";
    std::string id;
    id.reserve(24);
    for (int i = 0; i < 24; ++i) id += hex[rng() % 16];
    return id;
}

std::vector<VehicleMixEntry> default_mix() {
    return {
        {0, 0.55, 15.6, 5.9, 4.7},   // sedan
        {1, 0.15, 16.5, 6.3, 5.5},   // midsize
        {2, 0.10, 19.5, 6.6, 6.2},   // pickup
        {3, 0.08, 19.0, 6.8, 7.5},   // van
        {4, 0.08, 70.0, 8.5, 13.0},  // semi
        {5, 0.03, 30.0, 8.0, 11.0},  // truck
        {6, 0.01, 7.5, 3.0, 4.5},    // motorcycle
    };
}

struct SimVehicle {
    double entry_time = 0.0;
    int lane = 0;
    VehicleMixEntry dims;
    std::string id;
};

}  // namespace

double scenario_speed_field(const ScenarioSpec& spec, double x, double t) {
    double v = spec.free_flow_speed_ftps;
    if (spec.wave && spec.wave->amplitude_ftps > 0.0) {
        const WaveSpec& w = *spec.wave;
        const double wavelength = w.speed_ftps * w.period_s;
        // The bump pattern moves upstream: for eastbound traffic (+x travel)
        // the trough locus is x + c t = const, for westbound x - c t = const.
        const double arg = (x + spec.direction * w.speed_ftps * t) / wavelength;
        v -= w.amplitude_ftps * std::max(0.0, std::cos(2.0 * M_PI * arg));
    }
    return v;
}

Dataset generate_scenario(const ScenarioSpec& spec) {
    if (!(spec.extent_end > spec.extent_begin))
        throw DataError("scenario extent must be a nonempty interval");
    if (!(spec.duration_s > 0.0) || !(spec.inflow_vps >= 0.0) ||
        !(spec.free_flow_speed_ftps > 0.0) || spec.lane_count < 1 ||
        !(spec.lane_width_ft > 0.0))
        throw DataError("scenario rates, speeds and lane layout must be positive");
    if (spec.direction != 1 && spec.direction != -1)
        throw DataError("scenario direction must be -1 or +1");
    if (spec.wave) {
        if (!(spec.wave->amplitude_ftps < spec.free_flow_speed_ftps))
            throw DataError("wave amplitude must stay below the free-flow speed");
        if (!(spec.wave->period_s > 0.0) || !(spec.wave->speed_ftps > 0.0))
            throw DataError("wave period and propagation speed must be positive");
    }

    const double v_min = spec.free_flow_speed_ftps -
                         (spec.wave ? spec.wave->amplitude_ftps : 0.0);
    const double lane_rate = spec.inflow_vps / spec.lane_count;
    std::vector<VehicleMixEntry> mix =
        spec.vehicle_mix.empty() ? default_mix() : spec.vehicle_mix;
    double mean_length = 0.0, prob_sum = 0.0;
    for (const auto& m : mix) {
        mean_length += m.probability * m.length;
        prob_sum += m.probability;
    }
    if (!(prob_sum > 0.0)) throw DataError("vehicle mix probabilities must sum > 0");
    mean_length /= prob_sum;
    // Static feasibility: mean headway must exceed the space a vehicle plus
    // the minimum gap occupies at the slowest field speed.
    if (lane_rate > 0.0 && (mean_length + kMinGap) * lane_rate / v_min >= 1.0)
        throw DataError("infeasible scenario: inflow exceeds minimum-gap capacity");

    std::mt19937_64 rng(spec.seed);
    const double extent_len = spec.extent_end - spec.extent_begin;
    const double prefill_time = spec.prefill ? 1.2 * extent_len / v_min : 0.0;

    // Arrival processes per lane, then merged in deterministic order.
    std::vector<SimVehicle> arrivals;
    for (int lane = 1; lane <= spec.lane_count; ++lane) {
        double t = -prefill_time;
        if (lane_rate <= 0.0) continue;
        for (;;) {
            t += exponential(rng, lane_rate);
            if (t > spec.duration_s) break;
            SimVehicle v;
            v.entry_time = t;
            v.lane = lane;
            double pick = uniform01(rng) * prob_sum;
            v.dims = mix.back();
            for (const auto& m : mix) {
                if (pick <= m.probability) {
                    v.dims = m;
                    break;
                }
                pick -= m.probability;
            }
            const double jitter = 1.0 + spec.dimension_jitter * (2.0 * uniform01(rng) - 1.0);
            v.dims.length *= jitter;
            v.dims.width *= jitter;
            v.dims.height *= jitter;
            v.id = fresh_hex_id(rng);
            arrivals.push_back(std::move(v));
        }
    }
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const SimVehicle& a, const SimVehicle& b) {
                         if (a.lane != b.lane) return a.lane < b.lane;
                         return a.entry_time < b.entry_time;
                     });

    Dataset out;
    out.metadata.dataset_id = fresh_hex_id(rng);
    out.metadata.start_time = 0.0;
    out.metadata.duration = spec.duration_s;

    const double dir = static_cast<double>(spec.direction);
    const double x_entry = dir > 0 ? spec.extent_begin : spec.extent_end;

    // Per lane, the leader's sampled path constrains the follower.
    struct LanePath {
        long long k_first = 0;
        std::vector<double> x;
        double length = 0.0;
    };
    std::vector<LanePath> leader(spec.lane_count + 1);

    for (const auto& veh : arrivals) {
        long long k = static_cast<long long>(std::ceil(veh.entry_time * kGridHz));
        const LanePath& lead = leader[veh.lane];

        // Delay entry until the minimum gap to the leader is available.
        const auto leader_x_at = [&](long long step) -> std::optional<double> {
            if (lead.x.empty()) return std::nullopt;
            if (step < lead.k_first) return std::nullopt;  // leader not yet present
            const long long idx = step - lead.k_first;
            if (idx >= static_cast<long long>(lead.x.size())) return std::nullopt;
            return lead.x[static_cast<std::size_t>(idx)];
        };
        const auto entry_feasible = [&](long long step) {
            if (lead.x.empty()) return true;
            if (step < lead.k_first) return false;  // leader itself still queued
            if (step - lead.k_first >= static_cast<long long>(lead.x.size()))
                return true;  // leader already left the extent
            const double lx = lead.x[static_cast<std::size_t>(step - lead.k_first)];
            return dir * (lx - x_entry) >= veh.dims.length + kMinGap;
        };
        const long long k_limit = static_cast<long long>(spec.duration_s * kGridHz);
        while (k <= k_limit && !entry_feasible(k)) ++k;
        if (k > k_limit) continue;  // queue never cleared inside the window

        LanePath path;
        path.k_first = k;
        path.length = veh.dims.length;
        double x = x_entry;
        for (long long step = k;; ++step) {
            path.x.push_back(x);
            const double t = static_cast<double>(step) * kGridStep;
            if (dir > 0 ? x > spec.extent_end : x < spec.extent_begin) break;
            if (t > spec.duration_s + kGridStep) break;
            const double v = scenario_speed_field(spec, x, t);
            double x_next = x + dir * v * kGridStep;
            const auto lx = leader_x_at(step + 1);
            if (lx) {
                const double cap = *lx - dir * (veh.dims.length + kMinGap);
                if (dir * (x_next - cap) > 0.0) x_next = cap;
                if (dir * (x_next - x) < 0.0) x_next = x;  // never move backwards
            }
            x = x_next;
        }

        // Keep the in-extent, in-window samples.
        Trajectory traj;
        traj.id = veh.id;
        traj.vehicle_class = veh.dims.vehicle_class;
        traj.direction = spec.direction;
        traj.length = veh.dims.length;
        traj.width = veh.dims.width;
        traj.height = veh.dims.height;
        traj.configuration_id = static_cast<std::int64_t>(spec.seed);
        const double y = dir * (static_cast<double>(veh.lane) - 0.5) * spec.lane_width_ft;
        for (std::size_t i = 0; i < path.x.size(); ++i) {
            const long long step = path.k_first + static_cast<long long>(i);
            const double t = static_cast<double>(step) / kGridHz;
            if (t < 0.0 || t > spec.duration_s) continue;
            if (path.x[i] < spec.extent_begin || path.x[i] > spec.extent_end) continue;
            traj.timestamps.push_back(t);
            traj.x_positions.push_back(path.x[i]);
            traj.y_positions.push_back(y);
        }
        leader[veh.lane] = std::move(path);
        if (traj.timestamps.size() < 2) continue;
        traj.first_timestamp = traj.timestamps.front();
        traj.last_timestamp = traj.timestamps.back();
        traj.starting_x = traj.x_positions.front();
        traj.ending_x = traj.x_positions.back();
        out.trajectories.push_back(std::move(traj));
    }
    return out;
}

FragmentSet corrupt(const Dataset& dataset, const CorruptionSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    FragmentSet out;
    out.applied = spec;

    const auto deletion_cause = [&](double x, double t) -> const char* {
        for (const auto& band : spec.missing_pole_bands)
            if (x >= band[0] && x < band[1]) return "missing_pole";
        for (const auto& band : spec.overpass_bands)
            if (x >= band[0] && x < band[1]) return "overpass";
        for (const auto& block : spec.packet_drop_blocks)
            if (x >= block.x_begin && x < block.x_end && t >= block.t_begin &&
                t < block.t_end)
                return "packet_drop";
        return nullptr;
    };

    for (const Trajectory& parent : dataset.trajectories) {
        const std::size_t n = parent.timestamps.size();
        std::vector<bool> keep(n, true);
        for (std::size_t i = 0; i < n; ++i) {
            if (const char* cause =
                    deletion_cause(parent.x_positions[i], parent.timestamps[i])) {
                keep[i] = false;
                out.deletions.push_back({parent.id, parent.timestamps[i],
                                         parent.x_positions[i], parent.y_positions[i],
                                         cause});
            }
        }

        // Contiguous surviving runs become fragments; stranded single samples
        // cannot form a trajectory and are logged as deletions as well.
        std::size_t i = 0;
        while (i < n) {
            if (!keep[i]) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < n && keep[j]) ++j;
            if (j - i < 2) {
                out.deletions.push_back({parent.id, parent.timestamps[i],
                                         parent.x_positions[i], parent.y_positions[i],
                                         "isolated"});
                i = j;
                continue;
            }
            FragmentRecord frag;
            frag.parent_id = parent.id;
            frag.trajectory = parent;
            frag.trajectory.id = fresh_hex_id(rng);
            frag.trajectory.timestamps.assign(parent.timestamps.begin() + i,
                                              parent.timestamps.begin() + j);
            frag.trajectory.x_positions.assign(parent.x_positions.begin() + i,
                                               parent.x_positions.begin() + j);
            frag.trajectory.y_positions.assign(parent.y_positions.begin() + i,
                                               parent.y_positions.begin() + j);
            out.fragments.push_back(std::move(frag));
            i = j;
        }
    }

    // Lateral bias bands, then seeded white noise.
    for (auto& frag : out.fragments) {
        Trajectory& traj = frag.trajectory;
        for (std::size_t k = 0; k < traj.timestamps.size(); ++k) {
            for (const auto& band : spec.homography_shift_bands)
                if (traj.x_positions[k] >= band.x_begin && traj.x_positions[k] < band.x_end)
                    traj.y_positions[k] += band.bias_ft;
            if (spec.noise_sigma_x_ft > 0.0)
                traj.x_positions[k] += spec.noise_sigma_x_ft * gaussian(rng);
            if (spec.noise_sigma_y_ft > 0.0)
                traj.y_positions[k] += spec.noise_sigma_y_ft * gaussian(rng);
        }
        traj.first_timestamp = traj.timestamps.front();
        traj.last_timestamp = traj.timestamps.back();
        traj.starting_x = traj.x_positions.front();
        traj.ending_x = traj.x_positions.back();
    }
    return out;
}

// --- JSON ----------------------------------------------------------------

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_doc(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
}

std::string slurp(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + what + " file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ordered_json trajectory_fields(const Trajectory& t) {
    ordered_json rec;
    rec["_id"] = t.id;
    rec["coarse_vehicle_class"] = t.vehicle_class;
    rec["first_timestamp"] = t.first_timestamp;
    rec["last_timestamp"] = t.last_timestamp;
    rec["timestamp"] = t.timestamps;
    rec["x_position"] = t.x_positions;
    rec["y_position"] = t.y_positions;
    rec["starting_x"] = t.starting_x;
    rec["ending_x"] = t.ending_x;
    rec["length"] = t.length;
    rec["width"] = t.width;
    rec["height"] = t.height;
    rec["direction"] = t.direction;
    rec["configuration_id"] = t.configuration_id;
    return rec;
}

Trajectory trajectory_from_fields(const json& rec) {
    Trajectory t;
    t.id = rec.at("_id").get<std::string>();
    t.vehicle_class = rec.contains("coarse_vehicle_class")
                          ? rec["coarse_vehicle_class"].get<int>()
                          : rec.value("vehicle_class", 0);
    t.first_timestamp = rec.at("first_timestamp").get<double>();
    t.last_timestamp = rec.at("last_timestamp").get<double>();
    t.timestamps = rec.at("timestamp").get<std::vector<double>>();
    t.x_positions = rec.at("x_position").get<std::vector<double>>();
    t.y_positions = rec.at("y_position").get<std::vector<double>>();
    t.starting_x = rec.at("starting_x").get<double>();
    t.ending_x = rec.at("ending_x").get<double>();
    t.length = rec.at("length").get<double>();
    t.width = rec.at("width").get<double>();
    t.height = rec.at("height").get<double>();
    t.direction = rec.at("direction").get<int>();
    t.configuration_id = rec.value("configuration_id", -1);
    return t;
}

}  // namespace

ScenarioSpec parse_scenario_spec(const std::string& text) {
    const json doc = parse_doc(text);
    ScenarioSpec spec;
    if (doc.contains("extent_ft")) {
        spec.extent_begin = doc["extent_ft"][0].get<double>();
        spec.extent_end = doc["extent_ft"][1].get<double>();
    }
    spec.duration_s = doc.value("duration_s", spec.duration_s);
    spec.lane_count = doc.value("lane_count", spec.lane_count);
    spec.lane_width_ft = doc.value("lane_width_ft", spec.lane_width_ft);
    spec.direction = doc.value("direction", spec.direction);
    spec.inflow_vps = doc.value("inflow_vps", spec.inflow_vps);
    spec.free_flow_speed_ftps =
        doc.value("free_flow_speed_ftps", spec.free_flow_speed_ftps);
    if (doc.contains("wave") && !doc["wave"].is_null()) {
        WaveSpec wave;
        wave.amplitude_ftps = doc["wave"].value("amplitude_ftps", 0.0);
        wave.period_s = doc["wave"].value("period_s", 0.0);
        wave.speed_ftps = doc["wave"].value("speed_ftps", 0.0);
        spec.wave = wave;
    }
    if (doc.contains("vehicle_mix")) {
        for (const auto& m : doc["vehicle_mix"]) {
            VehicleMixEntry e;
            e.vehicle_class = m.value("class", 0);
            e.probability = m.value("probability", 1.0);
            e.length = m.value("length", e.length);
            e.width = m.value("width", e.width);
            e.height = m.value("height", e.height);
            spec.vehicle_mix.push_back(e);
        }
    }
    spec.seed = doc.value("seed", spec.seed);
    spec.prefill = doc.value("prefill", spec.prefill);
    spec.dimension_jitter = doc.value("dimension_jitter", spec.dimension_jitter);
    return spec;
}

ScenarioSpec read_scenario_file(const std::string& path) {
    return parse_scenario_spec(slurp(path, "scenario spec"));
}

CorruptionSpec parse_corruption_spec(const std::string& text) {
    const json doc = parse_doc(text);
    CorruptionSpec spec;
    if (doc.contains("missing_pole_bands"))
        for (const auto& b : doc["missing_pole_bands"])
            spec.missing_pole_bands.push_back({b[0].get<double>(), b[1].get<double>()});
    if (doc.contains("overpass_bands"))
        for (const auto& b : doc["overpass_bands"])
            spec.overpass_bands.push_back({b[0].get<double>(), b[1].get<double>()});
    if (doc.contains("packet_drop_blocks"))
        for (const auto& b : doc["packet_drop_blocks"])
            spec.packet_drop_blocks.push_back({b["x"][0].get<double>(),
                                               b["x"][1].get<double>(),
                                               b["t"][0].get<double>(),
                                               b["t"][1].get<double>()});
    if (doc.contains("homography_shift_bands"))
        for (const auto& b : doc["homography_shift_bands"])
            spec.homography_shift_bands.push_back(
                {b["x"][0].get<double>(), b["x"][1].get<double>(),
                 b["bias_ft"].get<double>()});
    spec.noise_sigma_x_ft = doc.value("noise_sigma_x_ft", 0.0);
    spec.noise_sigma_y_ft = doc.value("noise_sigma_y_ft", 0.0);
    spec.seed = doc.value("seed", spec.seed);
    return spec;
}

CorruptionSpec read_corruption_file(const std::string& path) {
    return parse_corruption_spec(slurp(path, "corruption spec"));
}

std::string write_fragment_set(const FragmentSet& set) {
    ordered_json doc;
    auto frags = ordered_json::array();
    for (const auto& f : set.fragments) {
        ordered_json rec = trajectory_fields(f.trajectory);
        rec["parent_id"] = f.parent_id;
        frags.push_back(rec);
    }
    doc["fragments"] = frags;
    auto dels = ordered_json::array();
    for (const auto& d : set.deletions)
        dels.push_back({{"parent_id", d.parent_id},
                        {"t", d.t},
                        {"x", d.x},
                        {"y", d.y},
                        {"cause", d.cause}});
    doc["deletions"] = dels;
    doc["noise_sigma_x_ft"] = set.applied.noise_sigma_x_ft;
    doc["noise_sigma_y_ft"] = set.applied.noise_sigma_y_ft;
    doc["seed"] = set.applied.seed;
    return doc.dump(2) + "\n";
}

FragmentSet parse_fragment_set(const std::string& text) {
    const json doc = parse_doc(text);
    FragmentSet set;
    // A bare dataset array is accepted as a fragment list without parents.
    const json& frags = doc.is_array() ? doc : doc.at("fragments");
    for (const auto& rec : frags) {
        FragmentRecord f;
        f.trajectory = trajectory_from_fields(rec);
        f.parent_id = rec.value("parent_id", std::string{});
        set.fragments.push_back(std::move(f));
    }
    if (doc.is_object() && doc.contains("deletions")) {
        for (const auto& d : doc["deletions"])
            set.deletions.push_back({d.value("parent_id", std::string{}),
                                     d.value("t", 0.0), d.value("x", 0.0),
                                     d.value("y", 0.0),
                                     d.value("cause", std::string{})});
    }
    if (doc.is_object()) {
        set.applied.noise_sigma_x_ft = doc.value("noise_sigma_x_ft", 0.0);
        set.applied.noise_sigma_y_ft = doc.value("noise_sigma_y_ft", 0.0);
        set.applied.seed = doc.value("seed", std::uint64_t{0});
    }
    return set;
}

FragmentSet read_fragment_file(const std::string& path) {
    return parse_fragment_set(slurp(path, "fragment set"));
}

}  // namespace trajlab
