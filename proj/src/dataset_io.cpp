#include "trajlab/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

using ordered_json = nlohmann::ordered_json;

double require_number(const nlohmann::json& rec, const char* key, std::size_t index) {
    auto it = rec.find(key);
    if (it == rec.end())
        throw SchemaError("record " + std::to_string(index) + ": missing field '" +
                              key + "'",
                          key, static_cast<std::ptrdiff_t>(index));
    if (!it->is_number())
        throw SchemaError("record " + std::to_string(index) + ": field '" + key +
                              "' is not a number",
                          key, static_cast<std::ptrdiff_t>(index));
    return it->get<double>();
}

std::vector<double> require_number_array(const nlohmann::json& rec, const char* key,
                                         std::size_t index) {
    auto it = rec.find(key);
    if (it == rec.end())
        throw SchemaError("record " + std::to_string(index) + ": missing field '" +
                              key + "'",
                          key, static_cast<std::ptrdiff_t>(index));
    if (!it->is_array())
        throw SchemaError("record " + std::to_string(index) + ": field '" + key +
                              "' is not an array",
                          key, static_cast<std::ptrdiff_t>(index));
    std::vector<double> values;
    values.reserve(it->size());
    for (const auto& elem : *it) {
        if (!elem.is_number())  // nulls and strings are rejected, not skipped
            throw SchemaError("record " + std::to_string(index) + ": field '" + key +
                                  "' contains a non-numeric entry",
                              key, static_cast<std::ptrdiff_t>(index));
        values.push_back(elem.get<double>());
    }
    return values;
}

Trajectory parse_record(const nlohmann::json& rec, std::size_t index) {
    if (!rec.is_object())
        throw SchemaError("record " + std::to_string(index) + ": not a JSON object",
                          "", static_cast<std::ptrdiff_t>(index));

    Trajectory traj;
    auto id_it = rec.find("_id");
    if (id_it == rec.end() || !id_it->is_string())
        throw SchemaError("record " + std::to_string(index) + ": missing field '_id'",
                          "_id", static_cast<std::ptrdiff_t>(index));
    traj.id = id_it->get<std::string>();

    // `vehicle_class` is accepted as an alias for the canonical key.
    const char* class_key = "coarse_vehicle_class";
    if (!rec.contains(class_key) && rec.contains("vehicle_class"))
        class_key = "vehicle_class";
    traj.vehicle_class = static_cast<int>(require_number(rec, class_key, index));

    traj.first_timestamp = require_number(rec, "first_timestamp", index);
    traj.last_timestamp = require_number(rec, "last_timestamp", index);
    traj.timestamps = require_number_array(rec, "timestamp", index);
    traj.x_positions = require_number_array(rec, "x_position", index);
    traj.y_positions = require_number_array(rec, "y_position", index);
    traj.starting_x = require_number(rec, "starting_x", index);
    traj.ending_x = require_number(rec, "ending_x", index);
    traj.length = require_number(rec, "length", index);
    traj.width = require_number(rec, "width", index);
    traj.height = require_number(rec, "height", index);
    traj.direction = static_cast<int>(require_number(rec, "direction", index));
    traj.configuration_id =
        static_cast<std::int64_t>(require_number(rec, "configuration_id", index));

    if (traj.x_positions.size() != traj.timestamps.size() ||
        traj.y_positions.size() != traj.timestamps.size())
        throw SchemaError("record " + std::to_string(index) +
                              ": timestamp/x_position/y_position lengths differ",
                          "x_position", static_cast<std::ptrdiff_t>(index));
    return traj;
}

ordered_json trajectory_to_json(const Trajectory& traj) {
    ordered_json rec;
    rec["_id"] = traj.id;
    rec["coarse_vehicle_class"] = traj.vehicle_class;
    rec["first_timestamp"] = traj.first_timestamp;
    rec["last_timestamp"] = traj.last_timestamp;
    rec["timestamp"] = traj.timestamps;
    rec["x_position"] = traj.x_positions;
    rec["y_position"] = traj.y_positions;
    rec["starting_x"] = traj.starting_x;
    rec["ending_x"] = traj.ending_x;
    rec["length"] = traj.length;
    rec["width"] = traj.width;
    rec["height"] = traj.height;
    rec["direction"] = traj.direction;
    rec["configuration_id"] = traj.configuration_id;
    return rec;
}

}  // namespace

Dataset parse_dataset(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    if (!doc.is_array())
        throw SchemaError("top-level JSON value is not an array", "", -1);

    Dataset dataset;
    dataset.trajectories.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i)
        dataset.trajectories.push_back(parse_record(doc[i], i));
    return dataset;
}

Dataset parse_dataset_stream(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str());
}

Dataset read_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);
    return parse_dataset_stream(in);
}

DatasetMetadata parse_dataset_metadata(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    DatasetMetadata meta;
    meta.dataset_id = doc.value("dataset_id", std::string{});
    meta.start_time = doc.value("start_time", 0.0);
    meta.duration = doc.value("duration", 0.0);
    meta.notes = doc.value("notes", std::string{});
    meta.geometry_file = doc.value("geometry_file", std::string{});
    return meta;
}

std::string write_dataset(const Dataset& dataset) {
    ValidationReport report = validate_dataset(dataset);
    if (!report.empty()) throw DatasetValidationError(std::move(report));

    ordered_json doc = ordered_json::array();
    for (const Trajectory& traj : dataset.trajectories)
        doc.push_back(trajectory_to_json(traj));
    return doc.dump(2) + "\n";
}

void write_dataset_file(const Dataset& dataset, const std::string& path) {
    const std::string text = write_dataset(dataset);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    out << text;
}

std::string write_validation_report(const ValidationReport& report) {
    ordered_json doc;
    doc["violation_count"] = report.violations.size();
    ordered_json counts = ordered_json::object();
    for (const auto& [code, count] : report.counts)
        counts[violation_code_name(code)] = count;
    doc["counts"] = counts;
    ordered_json items = ordered_json::array();
    for (const Violation& v : report.violations) {
        ordered_json item;
        item["trajectory_index"] = v.trajectory_index;
        item["code"] = violation_code_name(v.code);
        item["index_first"] = v.index_first;
        item["index_last"] = v.index_last;
        item["message"] = v.message;
        items.push_back(item);
    }
    doc["violations"] = items;
    return doc.dump(2) + "\n";
}

}  // namespace trajlab
