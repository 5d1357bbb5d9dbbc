#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace csc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not line up (group/entry named in the message).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input files or manifests that disagree with their declared contents.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV; the message carries the offending line number.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A file an archive or manifest refers to is absent.
class MissingArtifactError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Factorization failure, step-size underflow, non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Execution policy for the per-group kernels.
///
/// threads == 1 runs the serial reference kernels. With more threads the
/// OpenMP kernels are used; per-group results are still combined in group
/// order unless ordered_reduction is false, in which case cross-group sums
/// are accumulated per thread and results agree only to rounding.
struct Exec {
  int threads = 1;
  bool ordered_reduction = true;

  static Exec serial() { return {}; }
  bool parallel() const { return threads > 1; }
};

}  // namespace csc
