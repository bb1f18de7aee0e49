// errors.hpp — Error types shared across the toolkit

#pragma once

#include <stdexcept>
#include <string>

namespace sbnm {

// Bad user input: parameters, configs, grids. CLI exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical machinery failed: quadrature non-convergence, step underflow. CLI exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sbnm
