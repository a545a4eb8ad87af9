#pragma once

#include <stdexcept>
#include <string>

namespace gietlab {

/// Base class for all gietlab errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rejected input (bad permutation, malformed data, out-of-range argument).
struct InvalidInputError : Error {
    using Error::Error;
};

/// Reducible permutation where an irreducible one is required.
struct ReducibleError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

/// Integer arithmetic left the representable range.
struct IntegerOverflowError : Error {
    using Error::Error;
};

/// Hermite data whose cell interpolant fails to be strictly increasing.
struct NonMonotoneError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

/// Winner and loser lengths coincide below tolerance: the orbit of a break
/// point hits a break point and the map leaves the renormalisable set.
struct ConnectionError : Error {
    ConnectionError(const std::string& msg, int step) : Error(msg), step_index(step) {}
    int step_index;
};

/// Orbit or enumeration work exceeded its configured budget.
struct BudgetError : Error {
    using Error::Error;
};

/// A checker's hypothesis fails on the supplied data.
struct HypothesisError : Error {
    HypothesisError(const std::string& msg, int iterate) : Error(msg), iterate_index(iterate) {}
    int iterate_index;
};

/// Birkhoff sums look unbounded; no cohomological solution is emitted.
struct BoundednessError : Error {
    using Error::Error;
};

/// Shooting failed to find a shadowing unstable coordinate.
struct NoShadowError : Error {
    NoShadowError(const std::string& msg, int depth) : Error(msg), best_depth(depth) {}
    int best_depth;
};

/// Two constructions that must agree disagreed (a bug, not a recoverable state).
struct InternalConsistencyError : Error {
    using Error::Error;
};

/// Bad experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// The map left the configured neighbourhood of the fixed point.
struct NotInDomainError : Error {
    using Error::Error;
};

}  // namespace gietlab
