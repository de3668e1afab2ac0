#pragma once

// Shared exception hierarchy. Every library error derives from polysamp::Error
// so callers can separate computational failures from programming mistakes.

#include <stdexcept>
#include <string>

namespace polysamp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input dimensions disagree (matrix/vector shape mismatch, bad index).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// The feasible set is empty.
class EmptyPolytopeError : public Error {
 public:
  using Error::Error;
};

// The feasible set (or an LP) is unbounded where boundedness is required.
class UnboundedPolytopeError : public Error {
 public:
  using Error::Error;
};

// The polytope has no strictly interior point in its current description.
class DegeneratePolytopeError : public Error {
 public:
  using Error::Error;
};

// A matrix that must have full rank does not.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// A point lies on or outside the boundary where strict interiority is needed.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap; carries the final residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A factorization or floating-point computation failed irrecoverably.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Filesystem-level failure (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace polysamp
