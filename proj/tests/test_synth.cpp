#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "trajlab/dataset_io.hpp"
#include "trajlab/errors.hpp"
#include "trajlab/resample.hpp"
#include "trajlab/synth.hpp"

using namespace trajlab;

namespace {

ScenarioSpec free_flow_spec() {
    ScenarioSpec spec;
    spec.extent_begin = 0.0;
    spec.extent_end = 4000.0;
    spec.duration_s = 150.0;
    spec.lane_count = 1;
    spec.direction = 1;
    spec.inflow_vps = 0.06;
    spec.free_flow_speed_ftps = 100.0;
    spec.prefill = false;
    spec.seed = 11;
    return spec;
}

ScenarioSpec wave_spec() {
    ScenarioSpec spec;
    spec.extent_begin = 0.0;
    spec.extent_end = 4000.0;
    spec.duration_s = 400.0;
    spec.lane_count = 2;
    spec.direction = 1;
    spec.inflow_vps = 0.6;
    spec.free_flow_speed_ftps = 100.0;
    WaveSpec wave;
    wave.amplitude_ftps = 60.0;
    wave.period_s = 240.0;
    wave.speed_ftps = 19.07;
    spec.wave = wave;
    spec.seed = 5;
    spec.prefill = true;
    return spec;
}

}  // namespace

TEST_CASE("zero inflow produces an empty dataset") {
    ScenarioSpec spec = free_flow_spec();
    spec.inflow_vps = 0.0;
    CHECK(generate_scenario(spec).trajectories.empty());
}

TEST_CASE("free-flow transit takes extent/speed seconds with increasing x") {
    Dataset ds = generate_scenario(free_flow_spec());
    REQUIRE(!ds.trajectories.empty());
    bool checked_full_transit = false;
    for (const Trajectory& t : ds.trajectories) {
        for (std::size_t i = 1; i < t.size(); ++i)
            CHECK(t.x_positions[i] > t.x_positions[i - 1]);
        if (t.first_timestamp < 105.0 && t.starting_x < 1.0) {
            CHECK(std::abs(t.duration() - 40.0) <= 0.04 + 1e-9);
            checked_full_transit = true;
        }
    }
    CHECK(checked_full_transit);
}

TEST_CASE("generated data passes validation and sits on the 25 Hz grid") {
    Dataset ds = generate_scenario(wave_spec());
    REQUIRE(ds.trajectories.size() > 50);
    CHECK(validate_dataset(ds).empty());
    for (const Trajectory& t : ds.trajectories) {
        for (double ts : t.timestamps) {
            const double steps = ts * kGridHz;
            CHECK(std::abs(steps - std::round(steps)) < 1e-6);
        }
    }
}

TEST_CASE("same-lane minimum gap holds at every shared timestep") {
    ScenarioSpec spec = wave_spec();
    spec.inflow_vps = 1.2;  // push toward congestion
    Dataset ds = generate_scenario(spec);
    REQUIRE(!ds.trajectories.empty());

    // lane -> time step -> (x, length)
    std::map<int, std::map<long long, std::vector<std::pair<double, double>>>> lanes;
    for (const Trajectory& t : ds.trajectories) {
        const int lane = static_cast<int>(std::floor(std::abs(t.y_positions[0]) /
                                                     spec.lane_width_ft));
        for (std::size_t i = 0; i < t.size(); ++i) {
            const long long k = std::llround(t.timestamps[i] * kGridHz);
            lanes[lane][k].push_back({t.x_positions[i], t.length});
        }
    }
    for (auto& [lane, steps] : lanes) {
        (void)lane;
        for (auto& [k, cars] : steps) {
            (void)k;
            std::sort(cars.begin(), cars.end());
            for (std::size_t i = 1; i < cars.size(); ++i) {
                const double gap = cars[i].first - cars[i - 1].first - cars[i - 1].second;
                CHECK(gap >= 1.0 - 1e-6);
            }
        }
    }
}

TEST_CASE("planted wave trough moves upstream at the configured speed") {
    const ScenarioSpec spec = wave_spec();
    Dataset ds = generate_scenario(spec);
    REQUIRE(ds.trajectories.size() > 100);

    // Oracle: brute-force trough of the analytic speed field.
    const auto oracle_trough = [&](double t) {
        double best_x = 0.0, best_v = 1e300;
        for (double x = 0.0; x <= 4000.0; x += 1.0) {
            const double v = scenario_speed_field(spec, x, t);
            if (v < best_v) {
                best_v = v;
                best_x = x;
            }
        }
        return best_x;
    };
    // The oracle locus itself moves at -c.
    const double c = spec.wave->speed_ftps;
    double window_begin = 0.0;
    for (double t = 0.0; t < 300.0; t += 1.0) {
        if (oracle_trough(t) > 3600.0 && oracle_trough(t + 1.0) < oracle_trough(t)) {
            window_begin = t + 10.0;
            break;
        }
    }
    const double window_end = window_begin + 3200.0 / c - 20.0;
    CHECK(oracle_trough(window_begin) > oracle_trough(window_end));

    // Dataset estimate: centroid of deep-slowdown samples per time window.
    const double v_deep = spec.free_flow_speed_ftps - 0.9 * spec.wave->amplitude_ftps;
    std::vector<std::pair<double, double>> locus;  // (t, x)
    for (double t0 = window_begin; t0 + 5.0 <= window_end; t0 += 5.0) {
        double sum_x = 0.0;
        int count = 0;
        for (const Trajectory& traj : ds.trajectories) {
            std::vector<double> v = finite_difference(traj, 1);
            for (std::size_t i = 0; i < traj.size(); ++i) {
                if (traj.timestamps[i] < t0 || traj.timestamps[i] >= t0 + 5.0) continue;
                if (std::abs(v[i]) < v_deep) {
                    sum_x += traj.x_positions[i];
                    ++count;
                }
            }
        }
        if (count > 10) locus.push_back({t0 + 2.5, sum_x / count});
    }
    REQUIRE(locus.size() > 10);
    // Least-squares slope of the locus.
    double st = 0, sx = 0, stt = 0, stx = 0;
    for (const auto& [t, x] : locus) {
        st += t;
        sx += x;
        stt += t * t;
        stx += t * x;
    }
    const double n = static_cast<double>(locus.size());
    const double slope = (n * stx - st * sx) / (n * stt - st * st);
    CHECK(std::abs(slope - (-c)) < 0.2);
}

TEST_CASE("identical seeds give byte-identical datasets") {
    const ScenarioSpec spec = wave_spec();
    const std::string a = write_dataset(generate_scenario(spec));
    const std::string b = write_dataset(generate_scenario(spec));
    CHECK(a == b);
    ScenarioSpec other = spec;
    other.seed = spec.seed + 1;
    CHECK(write_dataset(generate_scenario(other)) != a);
}

TEST_CASE("infeasible inflow is rejected") {
    ScenarioSpec spec = free_flow_spec();
    spec.inflow_vps = 50.0;
    CHECK_THROWS_AS(generate_scenario(spec), DataError);
}

TEST_CASE("corrupt") {
    ScenarioSpec scenario = free_flow_spec();
    scenario.inflow_vps = 0.05;
    scenario.duration_s = 200.0;
    scenario.seed = 21;
    const Dataset truth = generate_scenario(scenario);
    REQUIRE(!truth.trajectories.empty());

    SUBCASE("empty spec keeps one identical fragment per parent") {
        CorruptionSpec none;
        FragmentSet set = corrupt(truth, none);
        REQUIRE(set.fragments.size() == truth.trajectories.size());
        CHECK(set.deletions.empty());
        for (std::size_t i = 0; i < set.fragments.size(); ++i) {
            const Trajectory& parent = truth.trajectories[i];
            const Trajectory& frag = set.fragments[i].trajectory;
            CHECK(set.fragments[i].parent_id == parent.id);
            CHECK(frag.id != parent.id);
            REQUIRE(frag.timestamps.size() == parent.timestamps.size());
            for (std::size_t k = 0; k < frag.timestamps.size(); ++k) {
                CHECK(frag.timestamps[k] == parent.timestamps[k]);
                CHECK(frag.x_positions[k] == parent.x_positions[k]);
                CHECK(frag.y_positions[k] == parent.y_positions[k]);
            }
        }
    }
    SUBCASE("a missing-pole band splits a crossing vehicle into two fragments") {
        CorruptionSpec spec;
        spec.missing_pole_bands.push_back({1000.0, 1200.0});
        FragmentSet set = corrupt(truth, spec);
        const std::string parent = truth.trajectories[0].id;
        std::vector<const FragmentRecord*> mine;
        for (const auto& f : set.fragments)
            if (f.parent_id == parent) mine.push_back(&f);
        REQUIRE(mine.size() == 2);
        const double gap = mine[1]->trajectory.first_timestamp -
                           mine[0]->trajectory.last_timestamp;
        const double transit = 200.0 / 100.0;  // band width / speed
        CHECK(std::abs(gap - transit) < 0.1);
        CHECK(mine[0]->trajectory.ending_x < 1000.0);
        CHECK(mine[1]->trajectory.starting_x >= 1200.0);
    }
    SUBCASE("packet-drop deletions reassemble the parent exactly at zero noise") {
        const Trajectory& parent = truth.trajectories[0];
        const double t0 = parent.first_timestamp + 0.2 * parent.duration();
        const double t1 = parent.first_timestamp + 0.3 * parent.duration();
        CorruptionSpec spec;
        spec.packet_drop_blocks.push_back({0.0, 4000.0, t0, t1});
        FragmentSet set = corrupt(truth, spec);

        for (const Trajectory& p : truth.trajectories) {
            std::vector<std::array<double, 3>> samples;
            for (const auto& f : set.fragments)
                if (f.parent_id == p.id)
                    for (std::size_t k = 0; k < f.trajectory.size(); ++k)
                        samples.push_back({f.trajectory.timestamps[k],
                                           f.trajectory.x_positions[k],
                                           f.trajectory.y_positions[k]});
            for (const auto& d : set.deletions)
                if (d.parent_id == p.id) samples.push_back({d.t, d.x, d.y});
            std::sort(samples.begin(), samples.end());
            REQUIRE(samples.size() == p.size());
            for (std::size_t k = 0; k < samples.size(); ++k) {
                CHECK(samples[k][0] == p.timestamps[k]);
                CHECK(samples[k][1] == p.x_positions[k]);
                CHECK(samples[k][2] == p.y_positions[k]);
            }
        }
    }
    SUBCASE("conservation of sample counts") {
        CorruptionSpec spec;
        spec.missing_pole_bands.push_back({500.0, 900.0});
        spec.packet_drop_blocks.push_back({2000.0, 2500.0, 20.0, 60.0});
        FragmentSet set = corrupt(truth, spec);
        std::size_t parent_total = 0, emitted = 0;
        for (const auto& t : truth.trajectories) parent_total += t.size();
        for (const auto& f : set.fragments) emitted += f.trajectory.size();
        CHECK(emitted + set.deletions.size() == parent_total);
    }
    SUBCASE("lateral bias and noise are applied") {
        CorruptionSpec spec;
        spec.homography_shift_bands.push_back({0.0, 4000.0, 2.5});
        FragmentSet set = corrupt(truth, spec);
        for (const auto& f : set.fragments) {
            const Trajectory* parent = nullptr;
            for (const auto& p : truth.trajectories)
                if (p.id == f.parent_id) parent = &p;
            REQUIRE(parent != nullptr);
            CHECK(f.trajectory.y_positions[0] ==
                  doctest::Approx(parent->y_positions[0] + 2.5));
        }

        CorruptionSpec noisy;
        noisy.noise_sigma_x_ft = 2.6;
        noisy.noise_sigma_y_ft = 0.6;
        noisy.seed = 7;
        FragmentSet nset = corrupt(truth, noisy);
        double sum_sq = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < nset.fragments.size(); ++i) {
            const Trajectory& parent = truth.trajectories[i];
            const Trajectory& frag = nset.fragments[i].trajectory;
            for (std::size_t k = 0; k < frag.size(); ++k) {
                sum_sq += std::pow(frag.x_positions[k] - parent.x_positions[k], 2);
                ++count;
            }
        }
        const double sigma = std::sqrt(sum_sq / count);
        CHECK(sigma == doctest::Approx(2.6).epsilon(0.15));
    }
    SUBCASE("fragment ids are fresh 24-hex and unique") {
        CorruptionSpec spec;
        spec.missing_pole_bands.push_back({1500.0, 1700.0});
        FragmentSet set = corrupt(truth, spec);
        std::set<std::string> ids;
        for (const auto& f : set.fragments) {
            CHECK(f.trajectory.id.size() == 24);
            CHECK(f.trajectory.id.find_first_not_of("0123456789abcdef") ==
                  std::string::npos);
            CHECK(ids.insert(f.trajectory.id).second);
        }
    }
}

TEST_CASE("scenario and corruption specs parse from JSON") {
    const char* text = R"({
        "extent_ft": [0, 8000],
        "duration_s": 1200,
        "lane_count": 3,
        "lane_width_ft": 12,
        "direction": -1,
        "inflow_vps": 0.5,
        "free_flow_speed_ftps": 95,
        "wave": {"amplitude_ftps": 55, "period_s": 126, "speed_ftps": 18.77},
        "seed": 42,
        "prefill": true
    })";
    ScenarioSpec spec = parse_scenario_spec(text);
    CHECK(spec.extent_end == 8000.0);
    CHECK(spec.lane_count == 3);
    CHECK(spec.direction == -1);
    REQUIRE(spec.wave.has_value());
    CHECK(spec.wave->period_s == 126.0);

    const char* corrupt_text = R"({
        "missing_pole_bands": [[1000, 1550]],
        "overpass_bands": [[3000, 3080]],
        "packet_drop_blocks": [{"x": [5000, 5600], "t": [100, 160]}],
        "homography_shift_bands": [{"x": [6000, 6200], "bias_ft": 1.5}],
        "noise_sigma_x_ft": 2.6,
        "noise_sigma_y_ft": 0.6,
        "seed": 3
    })";
    CorruptionSpec cs = parse_corruption_spec(corrupt_text);
    CHECK(cs.missing_pole_bands.size() == 1);
    CHECK(cs.overpass_bands.size() == 1);
    CHECK(cs.packet_drop_blocks.size() == 1);
    CHECK(cs.packet_drop_blocks[0].t_end == 160.0);
    CHECK(cs.homography_shift_bands[0].bias_ft == 1.5);
    CHECK(cs.noise_sigma_x_ft == 2.6);
}

TEST_CASE("fragment set JSON round trip") {
    ScenarioSpec scenario = free_flow_spec();
    scenario.duration_s = 60.0;
    const Dataset truth = generate_scenario(scenario);
    CorruptionSpec spec;
    spec.missing_pole_bands.push_back({1000.0, 1200.0});
    spec.noise_sigma_x_ft = 1.0;
    FragmentSet set = corrupt(truth, spec);
    FragmentSet back = parse_fragment_set(write_fragment_set(set));
    REQUIRE(back.fragments.size() == set.fragments.size());
    REQUIRE(back.deletions.size() == set.deletions.size());
    for (std::size_t i = 0; i < set.fragments.size(); ++i) {
        CHECK(back.fragments[i].parent_id == set.fragments[i].parent_id);
        CHECK(back.fragments[i].trajectory.id == set.fragments[i].trajectory.id);
        REQUIRE(back.fragments[i].trajectory.size() == set.fragments[i].trajectory.size());
        for (std::size_t k = 0; k < set.fragments[i].trajectory.size(); ++k)
            CHECK(back.fragments[i].trajectory.x_positions[k] ==
                  set.fragments[i].trajectory.x_positions[k]);
    }
}
