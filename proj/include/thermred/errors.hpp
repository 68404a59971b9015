#pragma once

#include <stdexcept>
#include <string>

namespace thermred {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inconsistent matrix/vector shapes.
struct DimensionError : Error {
    using Error::Error;
};

/// Non-finite or otherwise invalid numeric argument.
struct ValueError : Error {
    using Error::Error;
};

/// Operation requires a Hurwitz-stable system matrix.
struct StabilityError : Error {
    using Error::Error;
};

/// Iterative scheme failed to converge; carries the final residual.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual(residual) {}
    double residual;
};

/// Truncation split produced an unstable leading block; pick another order.
struct SplitError : Error {
    using Error::Error;
};

/// Query outside the covered time range (weather, schedules).
struct RangeError : Error {
    using Error::Error;
};

/// Building description refers to unknown zones or is otherwise malformed.
struct TopologyError : Error {
    using Error::Error;
};

/// Invalid run configuration (CLI-level).
struct ConfigError : Error {
    using Error::Error;
};

/// File read/write or parse failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace thermred
