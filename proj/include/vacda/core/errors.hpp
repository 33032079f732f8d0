#pragma once

#include <stdexcept>
#include <string>

namespace vacda {

// Error taxonomy maps onto CLI exit codes: ConfigError -> 1, DataError -> 2,
// NumericError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration: unknown keys, out-of-range hyperparameters, missing files
// named on the command line.
struct ConfigError : Error {
    using Error::Error;
};

// Bad or missing input data: unreadable dataset files, empty domains,
// malformed bundles, degenerate batches.
struct DataError : Error {
    using Error::Error;
};

// Tensor shape disagreement between caller and NetSpec or between operands.
struct ShapeError : DataError {
    using DataError::DataError;
};

// Non-finite value detected by a NaN guard during training.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace vacda
