#pragma once

#include <stdexcept>
#include <string>

namespace rangenoise {

/// Base class for all errors raised by this library. Precondition
/// violations (bad arguments) use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or truncated input file (RIF, model file, sample CSV).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

/// Estimation could not proceed: no board found, insufficient data,
/// degenerate residual distribution.
class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what) : Error(what) {}
};

/// Model fitting failed (rank-deficient design and similar).
class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(what) {}
};

}  // namespace rangenoise
