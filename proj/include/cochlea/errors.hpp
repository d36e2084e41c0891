#pragma once

#include <stdexcept>
#include <string>

namespace cochlea {

// Bad configuration, parameter files, malformed inputs. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures (singularities, non-convergence, instability). CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergenceError : NumericalError {
    NonConvergenceError(const std::string& msg, double residual)
        : NumericalError(msg), residual(residual) {}
    double residual;
};

struct FitError : NumericalError {
    using NumericalError::NumericalError;
};

struct TrainingError : NumericalError {
    TrainingError(const std::string& msg, std::uint64_t seed, int step)
        : NumericalError(msg), seed(seed), step(step) {}
    std::uint64_t seed;
    int step;
};

struct StiffnessError : NumericalError {
    using NumericalError::NumericalError;
};

struct CalibrationError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace cochlea
