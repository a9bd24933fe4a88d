#pragma once

#include <stdexcept>
#include <string>

namespace fairal {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (maps to CLI exit code 1).
struct ConfigError : Error {
    using Error::Error;
};

// Bad or missing data on disk / malformed inputs (maps to CLI exit code 2).
struct DataError : Error {
    using Error::Error;
};

// Input holds no usable rows.
struct NoDataError : DataError {
    using DataError::DataError;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

// masked_mean over an all-false mask; callers decide the fallback.
struct EmptyRegion : Error {
    using Error::Error;
};

// A declared group has no cases/scores.
struct MissingGroup : Error {
    using Error::Error;
};

struct BudgetExceedsPool : Error {
    using Error::Error;
};

} // namespace fairal
