#pragma once

#include <string>
#include <vector>

#include "ampcc/easa.hpp"
#include "ampcc/esdf.hpp"
#include "ampcc/optimizer.hpp"
#include "ampcc/reference_trajectory.hpp"
#include "ampcc/types.hpp"

namespace ampcc {

/// Closed interval used by the one-sided cubic feasibility penalties.
struct Bound {
  double lo = 0.0;
  double hi = 0.0;
};

/// One-sided cubic penalty: (lo - d)^3 below, (d - hi)^3 above, 0 inside.
double feasibility_penalty(double d, const Bound& b);
double feasibility_penalty_derivative(double d, const Bound& b);

/// Full third-order state of the spatial axes plus the progress dimension.
struct FullState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double theta = 0.0;
  double v_theta = 0.0;
  double a_theta = 0.0;
};

struct HighMpccConfig {
  double lambda_similarity = 20.0;
  double lambda_progress = 2.0;
  double lambda_adaptive = 5.0;
  double lambda_clearance = 30.0;
  double lambda_feasibility = 10.0;

  int horizon = 40;
  double dt = 0.05;
  double speed_threshold = 0.1;      // v_thr in the adaptive term
  double clearance_threshold = 0.8;  // activation distance of F_c
  double speed_smooth_eps = 1e-4;    // smooths ||v|| near zero

  Bound v_bound{-3.0, 3.0};
  Bound a_bound{-6.0, 6.0};
  Bound j_bound{-30.0, 30.0};
  Bound v_theta_bound{0.0, 3.0};

  EasaParams easa;
  OptimizeOptions optimizer;
  bool trace = false;  // record a per-iteration cost breakdown

  void validate() const;
};

/// Unweighted values of the five cost terms.
struct HighCostTerms {
  double similarity = 0.0;
  double progress = 0.0;
  double adaptive = 0.0;
  double clearance = 0.0;
  double feasibility = 0.0;

  double weighted_total(const HighMpccConfig& c) const {
    return c.lambda_similarity * similarity + c.lambda_progress * progress +
           c.lambda_adaptive * adaptive + c.lambda_clearance * clearance +
           c.lambda_feasibility * feasibility;
  }
};

/// Reference point and its progress derivative at theta (the coupling used
/// by the similarity term's theta gradient).
ReferenceTrajectory::Sample progress_coupling(const ReferenceTrajectory& ref, double theta);

/// Cost and gradient of the full objective over the stacked decision vector
/// [Jx(0..N-1); Jy; Jz; Jtheta] of jerk inputs. Throws NonFiniteError naming
/// the first offending term and step if the cost is non-finite.
double high_cost_and_gradient(const VecX& inputs, const ReferenceTrajectory& ref,
                              const EsdfField& esdf, const FullState& s0,
                              const HighMpccConfig& config, VecX& gradient,
                              HighCostTerms* terms = nullptr);

struct MpccIterate {
  int iteration = 0;
  HighCostTerms terms;
  double total = 0.0;
};

struct MpccSolution {
  VecX inputs;                    // 4N jerks
  std::vector<FullState> states;  // s_1..s_N, rolled out from `inputs`
  HighCostTerms terms;
  double cost = 0.0;
  OptimizeReport report;
  bool degraded = false;          // line-search failure before any tolerance
  bool infeasible_start = false;  // s_0 position at or below zero clearance
  std::vector<MpccIterate> trace;
};

/// Per-iteration breakdown of a traced solve as a text table.
std::string format_solution_dump(const MpccSolution& sol);

/// Optimize the local trajectory. `warm_start` (4N from a previous solve)
/// is shifted forward by `shift_steps` and zero-padded; pass an empty vector
/// for the cold-start policy (ramp the progress speed toward a cruise value
/// and follow the reference's accelerations along that ramp).
MpccSolution solve_high_mpcc(const ReferenceTrajectory& ref, const EsdfField& esdf,
                             const FullState& s0, const HighMpccConfig& config,
                             const VecX& warm_start = VecX(), int shift_steps = 0);

}  // namespace ampcc
