#pragma once

#include <stdexcept>
#include <string>

namespace levreg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

/// A^T A is numerically singular.
class RankDeficient : public InvalidMatrix {
 public:
  using InvalidMatrix::InvalidMatrix;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. line and column are 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(line ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what : what),
        line(line),
        column(column),
        detail(what) {}

  std::size_t line;
  std::size_t column;
  std::string detail;
};

/// Iteration budget exhausted. Retrying with fresh randomness may succeed.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed scalar root solve.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SamplingFailure : public Error {
 public:
  using Error::Error;
};

/// The sampled preconditioner does not contract; usually a leverage underestimate.
class PreconditionerQuality : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace levreg
