#ifndef MARGINLAB_ERRORS_HPP
#define MARGINLAB_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace marginlab {

/// Base class for all library errors. CLI exit codes are derived from the
/// concrete type (see tools/).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed arguments: non-finite inputs, dimension mismatches, bad config.
class InvalidInputError : public Error {
public:
  explicit InvalidInputError(const std::string& what) : Error(what) {}
};

/// Numerical failure that poisons a computation (degenerate denominators,
/// solver non-convergence, undefined ratios).
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Adam with epsilon = 0 hit v[k] == 0 exactly; carries the coordinate.
class DegenerateCoordinateError : public NumericalError {
public:
  DegenerateCoordinateError(std::size_t coordinate, std::size_t step)
      : NumericalError("second moment is exactly zero at coordinate " +
                       std::to_string(coordinate) + ", step " +
                       std::to_string(step)),
        coordinate(coordinate),
        step(step) {}
  std::size_t coordinate;
  std::size_t step;
};

/// Dataset admits no separating direction where one is required.
class NonSeparableError : public Error {
public:
  explicit NonSeparableError(const std::string& what) : Error(what) {}
};

/// LP has no feasible point.
class InfeasibleError : public NumericalError {
public:
  explicit InfeasibleError(const std::string& what) : NumericalError(what) {}
};

/// LP objective unbounded over the feasible region.
class UnboundedError : public NumericalError {
public:
  explicit UnboundedError(const std::string& what) : NumericalError(what) {}
};

/// Trajectory lacks the columns/rows a diagnostic needs.
class InsufficientLogError : public Error {
public:
  explicit InsufficientLogError(const std::string& what) : Error(what) {}
};

/// Run artifacts that cannot be merged (different dataset hashes).
class IncompatibleRunsError : public Error {
public:
  explicit IncompatibleRunsError(const std::string& what) : Error(what) {}
};

}  // namespace marginlab

#endif  // MARGINLAB_ERRORS_HPP
