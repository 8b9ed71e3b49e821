#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace art {

/// Operand shapes do not fit the operation.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated by the caller.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Non-finite value where a finite one is required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : DataError {
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_number(line) {}
    std::size_t line_number;
};

/// Checkpoint and configuration disagree on model structure.
struct IncompatibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace art
