#pragma once

#include <stdexcept>

namespace fatigue {

/// Invalid configuration (bad key, bad value, inconsistent settings).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Problem with input data (missing file, malformed row, empty result).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure (overflow in a forward pass, non-finite gradient).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fatigue
