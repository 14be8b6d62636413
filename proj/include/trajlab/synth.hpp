#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajlab/trajectory.hpp"

namespace trajlab {

// Planted stop-and-go wave: a moving slowdown in the prescribed speed field
// with known upstream propagation speed. The trough locus travels against
// the direction of traffic at speed_ftps.
struct WaveSpec {
    double amplitude_ftps = 0.0;  // speed drop at the trough
    double period_s = 0.0;        // temporal period at a fixed location
    double speed_ftps = 0.0;      // upstream propagation speed, positive
};

struct VehicleMixEntry {
    int vehicle_class = 0;
    double probability = 1.0;
    double length = 15.6;
    double width = 5.9;
    double height = 4.7;
};

struct ScenarioSpec {
    double extent_begin = 0.0;    // roadway x, ft
    double extent_end = 5280.0;
    double duration_s = 600.0;
    int lane_count = 4;
    double lane_width_ft = 12.0;
    int direction = -1;           // -1 westbound, +1 eastbound
    double inflow_vps = 0.3;      // total vehicles per second over all lanes
    double free_flow_speed_ftps = 100.0;
    std::optional<WaveSpec> wave;
    std::vector<VehicleMixEntry> vehicle_mix;  // empty -> built-in default mix
    std::uint64_t seed = 1;
    // Populate the roadway before t = 0 so the observed window starts in
    // steady state (no empty warm-up wedge in the time-space plane).
    bool prefill = true;
    double dimension_jitter = 0.08;  // relative, uniform
};

// Prescribed speed field value at (x, t): free-flow speed minus the planted
// wave bump. This is the scenario's ground-truth oracle.
double scenario_speed_field(const ScenarioSpec& spec, double x, double t);

// Generates the ground-truth dataset: seeded Poisson arrivals per lane,
// integration through the speed field at the 25 Hz grid, hard 1 ft minimum
// front-to-back gap to the same-lane leader. Deterministic per seed.
Dataset generate_scenario(const ScenarioSpec& spec);

// --- Corruption ---------------------------------------------------------

struct PacketDropBlock {
    double x_begin = 0.0, x_end = 0.0;
    double t_begin = 0.0, t_end = 0.0;
};

struct LateralShiftBand {
    double x_begin = 0.0, x_end = 0.0;
    double bias_ft = 0.0;
};

struct CorruptionSpec {
    std::vector<std::array<double, 2>> missing_pole_bands;  // x interval, all t
    std::vector<std::array<double, 2>> overpass_bands;      // narrow x interval, all t
    std::vector<PacketDropBlock> packet_drop_blocks;
    std::vector<LateralShiftBand> homography_shift_bands;
    double noise_sigma_x_ft = 0.0;
    double noise_sigma_y_ft = 0.0;
    std::uint64_t seed = 1;
};

struct FragmentRecord {
    Trajectory trajectory;   // fresh fragment id
    std::string parent_id;   // ground-truth vehicle this came from
};

// One deleted ground-truth sample, logged so corruption is reversible.
struct DeletedSample {
    std::string parent_id;
    double t = 0.0, x = 0.0, y = 0.0;
    std::string cause;  // missing_pole | overpass | packet_drop | isolated
};

struct FragmentSet {
    std::vector<FragmentRecord> fragments;
    std::vector<DeletedSample> deletions;
    CorruptionSpec applied;
};

// Deletes samples inside the configured bands/blocks, splits the survivors
// into fresh-id fragments at every deletion gap, applies lateral bias bands
// and seeded Gaussian noise, and logs every edit.
FragmentSet corrupt(const Dataset& dataset, const CorruptionSpec& spec);

// --- JSON interchange ---------------------------------------------------

ScenarioSpec parse_scenario_spec(const std::string& text);
ScenarioSpec read_scenario_file(const std::string& path);
CorruptionSpec parse_corruption_spec(const std::string& text);
CorruptionSpec read_corruption_file(const std::string& path);

std::string write_fragment_set(const FragmentSet& fragments);
FragmentSet parse_fragment_set(const std::string& text);
FragmentSet read_fragment_file(const std::string& path);

}  // namespace trajlab
