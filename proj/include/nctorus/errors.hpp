#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nctorus {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable tag, used by the CLI error reports.
  virtual const char* kind() const noexcept { return "error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// Operands carry different deformation parameters.
class CompositionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "composition"; }
};

/// A single truncation discarded more l1 mass than the policy allows.
class TruncationOverflow : public Error {
 public:
  TruncationOverflow(const std::string& what, double discarded)
      : Error(what), discarded_(discarded) {}
  double discarded() const noexcept { return discarded_; }
  const char* kind() const noexcept override { return "truncation_overflow"; }

 private:
  double discarded_;
};

class NotInvertible : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "not_invertible"; }
};

class ConditioningError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "conditioning"; }
};

/// The right-hand side lies outside the range of the operator.
class NoSolution : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "no_solution"; }
};

/// One completed point of a continuation path.
struct PathPoint {
  double t = 0.0;
  int inner_iterations = 0;
  double residual_l2 = 0.0;
  double lagrangian = 0.0;
};

class ContinuationStall : public Error {
 public:
  ContinuationStall(const std::string& what, std::vector<PathPoint> path)
      : Error(what), path_(std::move(path)) {}
  const std::vector<PathPoint>& path() const noexcept { return path_; }
  const char* kind() const noexcept override { return "continuation_stall"; }

 private:
  std::vector<PathPoint> path_;
};

}  // namespace nctorus
