#pragma once

#include "ampcc/types.hpp"

namespace ampcc {

/// Parameters of the velocity/distance-gradient risk weighting.
struct EasaParams {
  /// Change-rate coefficient of the sigmoid; larger alpha widens the gap
  /// between the approaching and departing weights.
  double alpha = 3.0;
  /// Below this speed the alignment angle is undefined; beta falls back to 0.
  double speed_epsilon = 1e-3;
  /// Same fallback when the distance gradient is this small.
  double gradient_epsilon = 1e-6;

  void validate() const {
    if (!(alpha > 0.0)) throw ContractError("easa: alpha must be > 0");
    if (!(speed_epsilon > 0.0) || !(gradient_epsilon > 0.0)) {
      throw ContractError("easa: epsilons must be > 0");
    }
  }
};

/// Cosine of the angle between velocity and the distance gradient,
/// clamped to [-1, 1]. Degenerate norms give the neutral value 0.
double easa_beta(const Vec3& v, const Vec3& grad_c, const EasaParams& params);

/// Risk weight eta(beta) = 2 / (1 + exp(alpha * beta)), in (0, 2).
/// Decreasing in beta; eta(0) = 1.
double easa_eta(double beta, const EasaParams& params);

/// d(eta)/d(beta) = -2 alpha e^{alpha beta} / (1 + e^{alpha beta})^2,
/// always negative.
double easa_eta_derivative(double beta, const EasaParams& params);

/// Partial derivatives of beta at (v, grad_c), split into the velocity and
/// gradient dependences:
///   d(beta)/d(v)       (exact)
///   d(beta)/d(grad_c)  (exact; chains through the field curvature to give
///                       the position dependence)
/// Degenerate norms yield zero derivatives, consistent with beta := 0.
struct BetaDerivatives {
  Vec3 d_v = Vec3::Zero();
  Vec3 d_grad = Vec3::Zero();
  bool degenerate = true;
};
BetaDerivatives easa_beta_derivatives(const Vec3& v, const Vec3& grad_c,
                                      const EasaParams& params);

/// Gradient of beta w.r.t. one axis input row, assembled per the chain
///   d(beta)/d(U_mu) = d(beta)/d(v_mu) dv_i/dU
///                   + (sum_nu d(beta)/d(g_nu) H(nu,mu)) dp_i/dU,
/// where H is the field curvature at the queried point. Passing a diagonal
/// H (the per-axis second derivatives) reproduces the decoupled form; the
/// full matrix gives the exact derivative of the interpolated field.
Vec3 easa_beta_position_chain(const BetaDerivatives& db, const Mat3& hessian);

}  // namespace ampcc
