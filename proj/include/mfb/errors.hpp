// Error types shared across the library. The CLI maps these onto exit codes:
// config errors -> 2, solver failures -> 3, resolution failures -> 4.
#pragma once

#include <stdexcept>
#include <string>

namespace mfb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonZeroMeanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnderResolvedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergenceError : SolverError {
    using SolverError::SolverError;
};

struct RhoForbiddenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LinearNoConvergenceError : SolverError {
    using SolverError::SolverError;
};

struct ContractionDivergedError : SolverError {
    using SolverError::SolverError;
};

struct QAdjustDivergedError : SolverError {
    using SolverError::SolverError;
};

} // namespace mfb
