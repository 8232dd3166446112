#pragma once

#include <stdexcept>
#include <string>

namespace polymodel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file or config (carries row/key context in the message).
struct ParseError : Error {
    using Error::Error;
};

/// Fewer observations than an operation's floor (e.g. < 8 overlapping months).
struct InsufficientDataError : Error {
    using Error::Error;
};

/// Normal-equations matrix not invertible; caller should use lambda > 0.
struct SingularSystemError : Error {
    using Error::Error;
};

/// Degenerate numeric input: zero-variance regressor, coincident quantile
/// nodes, zero-variance excess returns, empty relevant-factor set.
struct DegenerateInputError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace polymodel
