#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace ampcc {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;

/// Precondition or call-contract violation (caller bug, not runtime data).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// A query or endpoint outside the valid region. Carries the offending axis
/// and coordinate so callers can report exactly what went out of range.
class BoundsError : public std::runtime_error {
 public:
  BoundsError(int axis, double value, double lo, double hi)
      : std::runtime_error("coordinate out of bounds: axis " +
                           std::to_string(axis) + " value " +
                           std::to_string(value) + " valid [" +
                           std::to_string(lo) + ", " + std::to_string(hi) +
                           "]"),
        axis(axis),
        value(value),
        lo(lo),
        hi(hi) {}
  int axis;
  double value;
  double lo;
  double hi;
};

/// Start and goal are not connected in the (inflated) free space.
class UnreachableError : public std::runtime_error {
 public:
  explicit UnreachableError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Start or goal lies inside the inflated obstacle set.
class InvalidEndpointError : public std::runtime_error {
 public:
  explicit InvalidEndpointError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Malformed configuration, scenario, or map input.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A cost term produced a non-finite value; names the term and step.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& term, int step)
      : std::runtime_error("non-finite cost in term '" + term + "' at step " +
                           std::to_string(step)),
        term(term),
        step(step) {}
  std::string term;
  int step;
};

}  // namespace ampcc
