#include "ampcc/easa.hpp"

#include <algorithm>
#include <cmath>

namespace ampcc {

double easa_beta(const Vec3& v, const Vec3& grad_c, const EasaParams& params) {
  const double nv = v.norm();
  const double ng = grad_c.norm();
  if (nv <= params.speed_epsilon || ng <= params.gradient_epsilon) return 0.0;
  return std::clamp(v.dot(grad_c) / (nv * ng), -1.0, 1.0);
}

double easa_eta(double beta, const EasaParams& params) {
  return 2.0 / (1.0 + std::exp(params.alpha * beta));
}

double easa_eta_derivative(double beta, const EasaParams& params) {
  const double e = std::exp(params.alpha * beta);
  const double denom = (1.0 + e) * (1.0 + e);
  return -2.0 * params.alpha * e / denom;
}

BetaDerivatives easa_beta_derivatives(const Vec3& v, const Vec3& grad_c,
                                      const EasaParams& params) {
  BetaDerivatives out;
  const double nv = v.norm();
  const double ng = grad_c.norm();
  if (nv <= params.speed_epsilon || ng <= params.gradient_epsilon) return out;
  const double dot = v.dot(grad_c);
  out.d_v = (grad_c * nv * nv - v * dot) / (nv * nv * nv * ng);
  out.d_grad = (v * ng * ng - grad_c * dot) / (nv * ng * ng * ng);
  out.degenerate = false;
  return out;
}

Vec3 easa_beta_position_chain(const BetaDerivatives& db, const Mat3& hessian) {
  if (db.degenerate) return Vec3::Zero();
  return hessian.transpose() * db.d_grad;
}

}  // namespace ampcc
