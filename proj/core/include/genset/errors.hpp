#pragma once

#include <stdexcept>
#include <string>

namespace genset {

// Raised for invalid configuration, parameters, or input data.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a simulation or solver produces non-finite values or fails to
// converge.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace genset
