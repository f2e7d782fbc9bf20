#pragma once

#include <stdexcept>
#include <string>

namespace smattn {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration, bad CLI arguments resolved at validation time,
// infeasible requests (e.g. more negatives than eligible items).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data, empty datasets after filtering, unknown ids.
struct DataError : Error {
    using Error::Error;
};

// Non-finite values, degenerate softmax rows, shape mismatches and
// anything else that indicates the numeric state is broken.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace smattn
