#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace flatrep {

/// %g formatting for diagnostics (std::to_string truncates small values to 0.000000).
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violated an operation's precondition (shape, range, flatness, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class IndexOutOfRange : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class NotUnitaryError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Polar projection was asked to act on a (numerically) singular matrix.
class SingularityError : public PreconditionError {
 public:
  SingularityError(double smallest_singular_value)
      : PreconditionError("matrix is numerically singular: smallest singular value " +
                          format_real(smallest_singular_value) + " <= 1e-12"),
        smallest_singular_value_(smallest_singular_value) {}

  double smallest_singular_value() const noexcept { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

/// The principal logarithm is undefined because an eigenvalue sits on -1.
class BranchCutError : public PreconditionError {
 public:
  BranchCutError(double distance_to_minus_one)
      : PreconditionError("geodesic endpoint difference has an eigenvalue within " +
                          format_real(distance_to_minus_one) +
                          " of -1; insert an intermediate waypoint"),
        distance_(distance_to_minus_one) {}

  double distance_to_minus_one() const noexcept { return distance_; }

 private:
  double distance_;
};

/// An iterative method ran out of budget. Exit code 3 in the CLI.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Non-convergence carrying the best state reached, e.g. the best iterate of a flow.
template <class Payload>
class NonConvergence : public NonConvergenceError {
 public:
  NonConvergence(std::string what, Payload best)
      : NonConvergenceError(std::move(what)), best_(std::move(best)) {}

  const Payload& best() const noexcept { return best_; }

 private:
  Payload best_;
};

}  // namespace flatrep
