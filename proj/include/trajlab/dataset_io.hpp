#pragma once

#include <iosfwd>
#include <string>

#include "trajlab/errors.hpp"
#include "trajlab/trajectory.hpp"

namespace trajlab {

// Parses a dataset file: a UTF-8 JSON array of trajectory records keyed by
// the canonical attribute names (`_id`, `timestamp`, `x_position`, ...).
// Record order is preserved; all numbers are read as 64-bit floats.
// Throws ParseError (with byte offset) on malformed JSON and SchemaError
// (naming the field and record index) on missing/mistyped fields, nulls,
// or array length mismatches.
Dataset parse_dataset(const std::string& text);
Dataset parse_dataset_stream(std::istream& in);
Dataset read_dataset_file(const std::string& path);

// Optional sidecar metadata document (dataset id, start time, notes,
// geometry file path). Missing keys keep their defaults.
DatasetMetadata parse_dataset_metadata(const std::string& text);

// Serializes a dataset back to the canonical JSON array. Floats are written
// with shortest round-trip decimal encoding, so parse(write(d)) == d
// bit-exactly. Refuses datasets that fail validation.
struct DatasetValidationError : DataError {
    ValidationReport report;
    explicit DatasetValidationError(ValidationReport r)
        : DataError("dataset failed validation: " + r.summary()), report(std::move(r)) {}
};

std::string write_dataset(const Dataset& dataset);
void write_dataset_file(const Dataset& dataset, const std::string& path);

std::string write_validation_report(const ValidationReport& report);

}  // namespace trajlab
