#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace trajlab {

// Canonical dataset sampling rate and grid step.
inline constexpr double kGridHz = 25.0;
inline constexpr double kGridStep = 1.0 / kGridHz;

enum class VehicleClass : int {
    Sedan = 0,
    Midsize = 1,
    Pickup = 2,
    Van = 3,
    Semi = 4,
    Truck = 5,
    Motorcycle = 6,
};

// One vehicle's back-bottom-center path in roadway coordinates plus static
// attributes. Positions are feet, timestamps unix seconds, arrays parallel.
struct Trajectory {
    std::string id;  // 24 lowercase hex chars
    int vehicle_class = 0;
    double first_timestamp = 0.0;
    double last_timestamp = 0.0;
    std::vector<double> timestamps;
    std::vector<double> x_positions;
    std::vector<double> y_positions;
    double starting_x = 0.0;
    double ending_x = 0.0;
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;
    int direction = 1;  // -1 westbound, +1 eastbound
    std::int64_t configuration_id = -1;

    std::size_t size() const { return timestamps.size(); }
    double duration() const { return last_timestamp - first_timestamp; }
};

struct DatasetMetadata {
    std::string dataset_id;  // 24 hex chars, may be empty
    double start_time = 0.0;
    double duration = 0.0;
    std::string notes;
    std::string geometry_file;
};

struct Dataset {
    DatasetMetadata metadata;
    std::vector<Trajectory> trajectories;
};

enum class ViolationCode : int {
    ArrayLengthMismatch = 0,
    TooFewSamples = 1,
    NonfiniteValue = 2,
    NonmonotoneTimestamps = 3,
    OffGridTimestamps = 4,
    FirstTimestampMismatch = 5,
    LastTimestampMismatch = 6,
    StartingXMismatch = 7,
    EndingXMismatch = 8,
    BadDirection = 9,
    WrongSideOfRoadway = 10,
    NonpositiveDimension = 11,
    BadVehicleClass = 12,
    DuplicateId = 13,
};

const char* violation_code_name(ViolationCode code);

struct Violation {
    std::size_t trajectory_index;
    ViolationCode code;
    std::size_t index_first = 0;  // sample range the violation refers to
    std::size_t index_last = 0;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;  // ordered by (trajectory, code)
    std::map<ViolationCode, std::size_t> counts;

    bool empty() const { return violations.empty(); }
    std::string summary() const;
};

// Checks every Trajectory invariant plus dataset-level id uniqueness.
// Violations are data, not errors: this never throws on bad content.
ValidationReport validate_dataset(const Dataset& dataset);

}  // namespace trajlab
