#include "trajlab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace trajlab {

const char* violation_code_name(ViolationCode code) {
    switch (code) {
        case ViolationCode::ArrayLengthMismatch: return "array_length_mismatch";
        case ViolationCode::TooFewSamples: return "too_few_samples";
        case ViolationCode::NonfiniteValue: return "nonfinite_value";
        case ViolationCode::NonmonotoneTimestamps: return "nonmonotone_timestamps";
        case ViolationCode::OffGridTimestamps: return "off_grid_timestamps";
        case ViolationCode::FirstTimestampMismatch: return "first_timestamp_mismatch";
        case ViolationCode::LastTimestampMismatch: return "last_timestamp_mismatch";
        case ViolationCode::StartingXMismatch: return "starting_x_mismatch";
        case ViolationCode::EndingXMismatch: return "ending_x_mismatch";
        case ViolationCode::BadDirection: return "bad_direction";
        case ViolationCode::WrongSideOfRoadway: return "wrong_side_of_roadway";
        case ViolationCode::NonpositiveDimension: return "nonpositive_dimension";
        case ViolationCode::BadVehicleClass: return "bad_vehicle_class";
        case ViolationCode::DuplicateId: return "duplicate_id";
    }
    return "unknown";
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    out << violations.size() << " violation(s)";
    for (const auto& [code, count] : counts)
        out << "; " << violation_code_name(code) << "=" << count;
    return out.str();
}

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Timestamps must sit on a uniform 1/kGridHz lattice. The lattice phase is
// the trajectory's own first timestamp: released 25 Hz data is not always
// phase-aligned with the unix epoch, only internally uniform.
bool on_grid(const std::vector<double>& t) {
    const double t0 = t.front();
    for (double ti : t) {
        const double steps = (ti - t0) * kGridHz;
        if (std::abs(steps - std::round(steps)) > 1e-4) return false;
    }
    return true;
}

void check_trajectory(const Trajectory& traj, std::size_t index,
                      std::vector<Violation>& out) {
    auto add = [&](ViolationCode code, std::size_t first, std::size_t last,
                   std::string message) {
        out.push_back({index, code, first, last, std::move(message)});
    };

    const std::size_t n = traj.timestamps.size();
    const bool lengths_ok =
        traj.x_positions.size() == n && traj.y_positions.size() == n;
    if (!lengths_ok)
        add(ViolationCode::ArrayLengthMismatch, 0, n,
            "timestamp/x_position/y_position lengths differ");
    if (n < 2) add(ViolationCode::TooFewSamples, 0, n, "fewer than 2 samples");
    if (!lengths_ok || n < 2) return;  // downstream checks assume parallel arrays

    const bool finite = all_finite(traj.timestamps) && all_finite(traj.x_positions) &&
                        all_finite(traj.y_positions) && std::isfinite(traj.length) &&
                        std::isfinite(traj.width) && std::isfinite(traj.height) &&
                        std::isfinite(traj.first_timestamp) &&
                        std::isfinite(traj.last_timestamp);
    if (!finite) {
        add(ViolationCode::NonfiniteValue, 0, n - 1, "non-finite sample or attribute");
        return;
    }

    for (std::size_t i = 1; i < n; ++i) {
        if (!(traj.timestamps[i] > traj.timestamps[i - 1])) {
            add(ViolationCode::NonmonotoneTimestamps, i, i,
                "timestamps not strictly increasing");
            break;
        }
    }
    if (!on_grid(traj.timestamps))
        add(ViolationCode::OffGridTimestamps, 0, n - 1,
            "timestamps not on a uniform 25 Hz lattice");

    if (traj.first_timestamp != traj.timestamps.front())
        add(ViolationCode::FirstTimestampMismatch, 0, 0,
            "first_timestamp != timestamps[0]");
    if (traj.last_timestamp != traj.timestamps.back())
        add(ViolationCode::LastTimestampMismatch, n - 1, n - 1,
            "last_timestamp != timestamps[last]");
    if (traj.starting_x != traj.x_positions.front())
        add(ViolationCode::StartingXMismatch, 0, 0, "starting_x != x_position[0]");
    if (traj.ending_x != traj.x_positions.back())
        add(ViolationCode::EndingXMismatch, n - 1, n - 1,
            "ending_x != x_position[last]");

    if (traj.direction != -1 && traj.direction != 1) {
        add(ViolationCode::BadDirection, 0, 0, "direction not in {-1, +1}");
    } else {
        double mean_y = 0.0;
        for (double y : traj.y_positions) mean_y += y;
        mean_y /= static_cast<double>(n);
        if (mean_y * traj.direction <= 0.0)
            add(ViolationCode::WrongSideOfRoadway, 0, n - 1,
                "sign(mean y) does not match direction");
    }

    if (!(traj.length > 0.0) || !(traj.width > 0.0) || !(traj.height > 0.0))
        add(ViolationCode::NonpositiveDimension, 0, 0,
            "length/width/height must be positive");
    if (traj.vehicle_class < 0 || traj.vehicle_class > 6)
        add(ViolationCode::BadVehicleClass, 0, 0, "vehicle class outside 0..6");
}

}  // namespace

ValidationReport validate_dataset(const Dataset& dataset) {
    ValidationReport report;
    std::set<std::string> seen_ids;
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
        const Trajectory& traj = dataset.trajectories[i];
        std::vector<Violation> local;
        check_trajectory(traj, i, local);
        if (!seen_ids.insert(traj.id).second)
            local.push_back({i, ViolationCode::DuplicateId, 0, 0,
                             "trajectory id already used in this dataset"});
        std::sort(local.begin(), local.end(), [](const Violation& a, const Violation& b) {
            return static_cast<int>(a.code) < static_cast<int>(b.code);
        });
        for (auto& v : local) report.violations.push_back(std::move(v));
    }
    for (const auto& v : report.violations) ++report.counts[v.code];
    return report;
}

}  // namespace trajlab
