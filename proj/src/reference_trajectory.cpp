#include "ampcc/reference_trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace ampcc {

ReferenceTrajectory::ReferenceTrajectory(std::vector<Vec3> knots, double dt)
    : knots_(std::move(knots)), dt_(dt) {
  if (knots_.empty()) throw ContractError("reference requires at least one knot");
  if (!(dt_ > 0.0)) throw ContractError("reference dt must be positive");
}

Vec3 ReferenceTrajectory::tangent(std::size_t i) const {
  const std::size_t last = knots_.size() - 1;
  if (knots_.size() == 1) return Vec3::Zero();
  if (i == 0) return (knots_[1] - knots_[0]) / dt_;
  if (i == last) return (knots_[last] - knots_[last - 1]) / dt_;
  return (knots_[i + 1] - knots_[i - 1]) / (2.0 * dt_);
}

ReferenceTrajectory::Sample ReferenceTrajectory::eval(double theta) const {
  const double end = domain_end();
  if (knots_.size() == 1 || theta <= 0.0 || theta >= end) {
    // Clamp with vanishing derivatives so progress reward saturates past the
    // end instead of extrapolating. theta == 0 / theta == end still return
    // the exact endpoint positions.
    Sample s;
    if (theta <= 0.0) {
      s.position = knots_.front();
      if (theta == 0.0 && knots_.size() > 1) {
        s.velocity = tangent(0);
        s.acceleration = Vec3::Zero();
        return s;
      }
    } else {
      s.position = knots_.back();
    }
    s.velocity = Vec3::Zero();
    s.acceleration = Vec3::Zero();
    return s;
  }

  const auto seg_f = std::floor(theta / dt_);
  std::size_t seg = static_cast<std::size_t>(seg_f);
  seg = std::min(seg, knots_.size() - 2);
  const double u = theta / dt_ - static_cast<double>(seg);

  const Vec3& p0 = knots_[seg];
  const Vec3& p1 = knots_[seg + 1];
  const Vec3 m0 = tangent(seg);
  const Vec3 m1 = tangent(seg + 1);

  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
  const double h10 = u3 - 2.0 * u2 + u;
  const double h01 = -2.0 * u3 + 3.0 * u2;
  const double h11 = u3 - u2;

  const double d00 = 6.0 * u2 - 6.0 * u;
  const double d10 = 3.0 * u2 - 4.0 * u + 1.0;
  const double d01 = -6.0 * u2 + 6.0 * u;
  const double d11 = 3.0 * u2 - 2.0 * u;

  const double s00 = 12.0 * u - 6.0;
  const double s10 = 6.0 * u - 4.0;
  const double s01 = -12.0 * u + 6.0;
  const double s11 = 6.0 * u - 2.0;

  Sample s;
  s.position = h00 * p0 + h01 * p1 + dt_ * (h10 * m0 + h11 * m1);
  s.velocity = (d00 * p0 + d01 * p1) / dt_ + d10 * m0 + d11 * m1;
  s.acceleration = (s00 * p0 + s01 * p1) / (dt_ * dt_) + (s10 * m0 + s11 * m1) / dt_;
  return s;
}

double ReferenceTrajectory::project(const Vec3& p, double theta_lo, double theta_hi) const {
  const double end = domain_end();
  double lo = std::clamp(theta_lo, 0.0, end);
  double hi = std::clamp(theta_hi, 0.0, end);
  if (hi < lo) std::swap(lo, hi);
  if (hi - lo < 1e-12) return lo;

  // Coarse scan, then ternary refinement inside the best bracket.
  const int samples = std::max(8, static_cast<int>(std::ceil((hi - lo) / (0.1 * dt_))));
  double best_theta = lo;
  double best_d2 = (p - position(lo)).squaredNorm();
  for (int k = 1; k <= samples; ++k) {
    const double th = lo + (hi - lo) * static_cast<double>(k) / samples;
    const double d2 = (p - position(th)).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_theta = th;
    }
  }

  const double step = (hi - lo) / samples;
  double a = std::max(lo, best_theta - step);
  double b = std::min(hi, best_theta + step);
  for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
    const double t1 = a + (b - a) / 3.0;
    const double t2 = b - (b - a) / 3.0;
    if ((p - position(t1)).squaredNorm() < (p - position(t2)).squaredNorm()) {
      b = t2;
    } else {
      a = t1;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace ampcc
