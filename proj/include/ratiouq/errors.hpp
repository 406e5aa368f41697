#pragma once

#include <stdexcept>
#include <string>

namespace ratiouq {

// Argument outside the mathematical domain of an operation (negative x, u > 1, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Invalid distribution or model parameters.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Forward model outside the supported family (m <= 0 or p <= 0).
struct UnsupportedModelError : ParameterError {
    using ParameterError::ParameterError;
};

// Non-conforming dimensions between counts, kernels and grids.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Kernel matrix with no usable spectrum.
struct DegenerateKernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Objective or gradient undefined at the requested point.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data (CSV parse failures, invalid counts).
struct DataError : std::runtime_error {
    DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ratiouq
