#pragma once

#include <vector>

#include "ampcc/types.hpp"

namespace ampcc {

/// Smooth reference curve rho(theta) through the low-level knots,
/// parameterized by theta in [0, M*dt] (time units). Piecewise cubic
/// Hermite with Catmull-Rom tangents on the uniform theta grid: C1 inside
/// the domain and exact at knots. Outside the domain the curve clamps to
/// the nearest endpoint with zero derivatives.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory(std::vector<Vec3> knots, double dt);

  struct Sample {
    Vec3 position;
    Vec3 velocity;      // d(rho)/d(theta)
    Vec3 acceleration;  // d2(rho)/d(theta)2
  };

  Sample eval(double theta) const;
  Vec3 position(double theta) const { return eval(theta).position; }

  double dt() const { return dt_; }
  double domain_end() const { return dt_ * static_cast<double>(knots_.size() - 1); }
  const std::vector<Vec3>& knots() const { return knots_; }

  /// Progress parameter of the closest curve point to p, searched over
  /// [theta_lo, theta_hi] by dense sampling plus local refinement.
  double project(const Vec3& p, double theta_lo, double theta_hi) const;

 private:
  Vec3 tangent(std::size_t i) const;

  std::vector<Vec3> knots_;
  double dt_;
};

}  // namespace ampcc
