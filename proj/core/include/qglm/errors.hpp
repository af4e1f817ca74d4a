#pragma once

#include <stdexcept>
#include <string>

namespace qglm {

// Base class for every error thrown by this library. The CLI maps the
// subclasses onto its exit codes: UsageError -> 1, DataError -> 2, and
// everything else (parameter misuse, numerical failures) -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed command line or config file.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input data (missing files, bad CSV rows).
class DataError : public Error {
 public:
  using Error::Error;
};

// A caller violated an interface contract: bad dimensions, out-of-range
// parameters, mismatched cutoffs.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A computation failed numerically: degenerate scalers, singular designs,
// truncation losses, divergent fits.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace qglm
