#pragma once

#include <vector>

#include "ampcc/esdf.hpp"
#include "ampcc/optimizer.hpp"
#include "ampcc/reference_trajectory.hpp"
#include "ampcc/types.hpp"

namespace ampcc {

/// Low-level reference layer: first-order integrator MPC over the guide
/// path. Decision variables are the per-axis velocity inputs, stacked
/// [ux(0..M-1); uy(...); uz(...)].
struct LowMpcConfig {
  double kappa_similarity = 1.0;
  double kappa_clearance = 10.0;
  double kappa_smoothness = 0.1;
  double clearance_threshold = 0.8;  // meters; penalty activates below this
  double dt = 0.4;
  double ref_speed = 2.0;  // guide resample spacing = ref_speed * dt
  int horizon = 12;        // max segments kept from the guide per replan
  OptimizeOptions optimizer;

  void validate() const;
};

struct LowMpcCost {
  double total = 0.0;
  double similarity = 0.0;
  double clearance = 0.0;
  double smoothness = 0.0;
};

/// One-sided quadratic clearance penalty and its derivative.
double clearance_penalty(double c, double c_thr);
double clearance_penalty_derivative(double c, double c_thr);

/// Cost and gradient of the low-level objective. `guide` holds M+1 points
/// g_0..g_M with g_0 the start position; `inputs` has length 3M.
LowMpcCost low_cost_and_gradient(const VecX& inputs, const std::vector<Vec3>& guide,
                                 const EsdfField& esdf, const LowMpcConfig& config,
                                 VecX& gradient);

struct LowMpcResult {
  ReferenceTrajectory reference;
  std::vector<Vec3> knots;  // p_0..p_M, p_0 = guide start
  VecX inputs;
  LowMpcCost cost;
  OptimizeReport report;
  bool degraded = false;  // optimizer stopped on line-search failure
};

/// Optimize the reference from a guide polyline (resampled beforehand).
LowMpcResult solve_low_mpc(const std::vector<Vec3>& guide, const EsdfField& esdf,
                           const LowMpcConfig& config);

}  // namespace ampcc
