#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajlab {

// Malformed or invalid input data. CLI maps this family to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON document could not be parsed at all.
struct ParseError : DataError {
    std::size_t byte_offset;
    ParseError(const std::string& msg, std::size_t offset)
        : DataError(msg), byte_offset(offset) {}
};

// Document parsed but a record violates the expected schema.
struct SchemaError : DataError {
    std::string field;
    std::ptrdiff_t record_index;
    SchemaError(const std::string& msg, std::string field_name, std::ptrdiff_t record)
        : DataError(msg), field(std::move(field_name)), record_index(record) {}
};

// A query fell outside a fitted model's valid domain.
struct DomainError : DataError {
    using DataError::DataError;
};

// An iterative numeric procedure failed to reach its target. Exit code 3.
struct ConvergenceError : std::runtime_error {
    double best_residual;
    explicit ConvergenceError(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), best_residual(residual) {}
};

// Signal analysis found no qualifying feature (correlation peak, power peak).
struct NoFeatureError : ConvergenceError {
    using ConvergenceError::ConvergenceError;
};

}  // namespace trajlab
