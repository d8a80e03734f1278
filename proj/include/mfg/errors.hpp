#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid model data: bad shapes, negative entries, rows that do not sum to 1
// beyond tolerance, parameters out of range. Maps to CLI exit code 2.
struct ModelError : Error {
    using Error::Error;
};

// Malformed or incomplete model file. The message names the offending JSON
// path. Maps to CLI exit code 2.
struct ParseError : ModelError {
    using ModelError::ModelError;
};

// An iterative solver hit its budget without reaching tolerance. Carries the
// best residual seen so the caller can report how close it got. Maps to CLI
// exit code 3.
struct NonConvergenceError : Error {
    double best_residual;
    int iterations;
    NonConvergenceError(const std::string& what, double residual, int iters)
        : Error(what), best_residual(residual), iterations(iters) {}
};

// Value iteration exceeded its a priori budget; signals the contraction
// modulus is numerically ~1 (lambda mass too small). Maps to exit code 3.
struct MaxIterExceededError : NonConvergenceError {
    using NonConvergenceError::NonConvergenceError;
};

// The requested analysis is defined only for a narrower model class, e.g.
// finite-N best-response machinery needs a population-independent kernel.
// Maps to CLI exit code 4.
struct UnsupportedModelError : Error {
    using Error::Error;
};

// Enumeration bound exceeded (brute-force oracles only).
struct TooLargeError : Error {
    using Error::Error;
};

// Caller passed a (policy, measure) pair whose self-consistency residual is
// too large for the requested computation to be meaningful.
struct InconsistentInputError : Error {
    using Error::Error;
};

}  // namespace mfg
