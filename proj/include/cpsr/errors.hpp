#pragma once

#include <stdexcept>
#include <string>

namespace cpsr {

// Usage / configuration problems (CLI exit code 1).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures (CLI exit code 2).
struct FitError : std::runtime_error {
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct IntegrationError : std::runtime_error {
    explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

// Spatial light grid needs refinement; the driver reacts by doubling density.
struct RefinementError : std::runtime_error {
    explicit RefinementError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cpsr
