#pragma once

#include <stdexcept>
#include <string>

namespace biharp {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Grid exponent too small for the requested operation, or two grid-backed
/// objects live at different resolutions.
struct ResolutionError : Error {
    using Error::Error;
};

/// A parameter lies outside its mathematical domain (p outside (0,2],
/// theta outside (0,1), Hoelder exponent in [0,1], ...).
struct DomainError : Error {
    using Error::Error;
};

/// A documented precondition on the input data fails (subset fraction below
/// epsilon, zero cell under a negative exponent, ...).
struct PreconditionError : Error {
    using Error::Error;
};

/// The input is degenerate for the operation (e.g. the zero expansion has
/// no atomic decomposition).
struct DegenerateInputError : Error {
    using Error::Error;
};

/// An inequality that the library asserts unconditionally was violated.
/// Reaching this means either a numerical-tolerance problem or a genuine bug;
/// callers translate it to exit code 1.
struct VerificationError : Error {
    using Error::Error;
};

/// Invalid run configuration (ensemble density, counts, CLI flag combos).
struct ConfigError : Error {
    using Error::Error;
};

/// File system / serialization failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace biharp
