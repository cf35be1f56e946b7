#include "ampcc/low_mpc.hpp"

#include <cmath>

#include "ampcc/linear_system.hpp"

namespace ampcc {

void LowMpcConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("low_mpc.dt must be positive");
  if (!(ref_speed > 0.0)) throw ConfigError("low_mpc.ref_speed must be positive");
  if (horizon < 1) throw ConfigError("low_mpc.horizon must be >= 1");
  if (kappa_similarity < 0.0 || kappa_clearance < 0.0 || kappa_smoothness < 0.0)
    throw ConfigError("low_mpc weights must be non-negative");
  if (!(clearance_threshold > 0.0)) throw ConfigError("low_mpc.clearance_threshold must be positive");
  optimizer.validate();
}

double clearance_penalty(double c, double c_thr) {
  if (c >= c_thr) return 0.0;
  const double d = c - c_thr;
  return d * d;
}

double clearance_penalty_derivative(double c, double c_thr) {
  if (c >= c_thr) return 0.0;
  return 2.0 * (c - c_thr);
}

LowMpcCost low_cost_and_gradient(const VecX& inputs, const std::vector<Vec3>& guide,
                                 const EsdfField& esdf, const LowMpcConfig& config,
                                 VecX& gradient) {
  if (guide.size() < 2) throw ContractError("low_mpc guide needs at least two points");
  const int horizon = static_cast<int>(guide.size()) - 1;
  if (inputs.size() != 3 * horizon)
    throw ContractError("low_mpc input vector has wrong length");

  const IntegratorModel model(1, config.dt, horizon);
  const BatchMaps batch(model);
  const Vec3 start = guide.front();

  // Per-axis rollout: positions p_1..p_M.
  Eigen::MatrixXd pos(horizon, 3);
  for (int axis = 0; axis < 3; ++axis) {
    VecX s0(1);
    s0[0] = start[axis];
    pos.col(axis) = batch.apply(s0, inputs.segment(axis * horizon, horizon));
  }

  LowMpcCost cost;
  gradient = VecX::Zero(inputs.size());
  Eigen::MatrixXd state_grad = Eigen::MatrixXd::Zero(horizon, 3);

  for (int i = 0; i < horizon; ++i) {
    const Vec3 p = pos.row(i).transpose();
    const Vec3 g = guide[static_cast<std::size_t>(i) + 1];

    const Vec3 diff = p - g;
    cost.similarity += diff.squaredNorm();
    state_grad.row(i) += config.kappa_similarity * 2.0 * diff.transpose();

    bool clamped[3];
    const Vec3 q = esdf.clamp_to_query_bounds(p, clamped);
    const EsdfQuery eq = esdf.query(q);
    cost.clearance += clearance_penalty(eq.value, config.clearance_threshold);
    const double dpen = clearance_penalty_derivative(eq.value, config.clearance_threshold);
    if (dpen != 0.0) {
      for (int axis = 0; axis < 3; ++axis) {
        if (!clamped[axis])
          state_grad(i, axis) += config.kappa_clearance * dpen * eq.gradient[axis];
      }
    }
  }

  // Input-difference smoothness, per axis.
  for (int axis = 0; axis < 3; ++axis) {
    const auto u = inputs.segment(axis * horizon, horizon);
    for (int i = 0; i + 1 < horizon; ++i) {
      const double d = u[i + 1] - u[i];
      cost.smoothness += d * d;
      gradient[axis * horizon + i] -= config.kappa_smoothness * 2.0 * d;
      gradient[axis * horizon + i + 1] += config.kappa_smoothness * 2.0 * d;
    }
  }

  for (int axis = 0; axis < 3; ++axis) {
    Eigen::MatrixXd rows = state_grad.col(axis);
    gradient.segment(axis * horizon, horizon) += batch.accumulate_input_gradient(rows);
  }

  cost.total = config.kappa_similarity * cost.similarity +
               config.kappa_clearance * cost.clearance +
               config.kappa_smoothness * cost.smoothness;
  return cost;
}

LowMpcResult solve_low_mpc(const std::vector<Vec3>& guide, const EsdfField& esdf,
                           const LowMpcConfig& config) {
  config.validate();
  if (guide.empty()) throw ContractError("low_mpc guide is empty");

  const int horizon = static_cast<int>(guide.size()) - 1;
  if (horizon == 0) {
    // Degenerate guide: reference is the single point.
    LowMpcResult out{ReferenceTrajectory({guide.front()}, config.dt),
                     {guide.front()},
                     VecX::Zero(0),
                     {},
                     {},
                     false};
    return out;
  }

  // Start from the inputs that reproduce the guide exactly.
  VecX x0(3 * horizon);
  for (int axis = 0; axis < 3; ++axis)
    for (int i = 0; i < horizon; ++i)
      x0[axis * horizon + i] =
          (guide[static_cast<std::size_t>(i) + 1][axis] - guide[static_cast<std::size_t>(i)][axis]) /
          config.dt;

  auto objective = [&](const VecX& u, VecX& grad) {
    return low_cost_and_gradient(u, guide, esdf, config, grad).total;
  };

  const MinimizeResult res = minimize(objective, x0, config.optimizer);

  LowMpcResult out{ReferenceTrajectory({guide.front()}, config.dt),
                   {},
                   res.x,
                   {},
                   res.report,
                   res.report.reason == TerminationReason::kLineSearchFailure};

  VecX grad_unused;
  out.cost = low_cost_and_gradient(res.x, guide, esdf, config, grad_unused);

  const IntegratorModel model(1, config.dt, horizon);
  const BatchMaps batch(model);
  out.knots.resize(static_cast<std::size_t>(horizon) + 1);
  out.knots[0] = guide.front();
  Eigen::MatrixXd pos(horizon, 3);
  for (int axis = 0; axis < 3; ++axis) {
    VecX s0(1);
    s0[0] = guide.front()[axis];
    pos.col(axis) = batch.apply(s0, res.x.segment(axis * horizon, horizon));
  }
  for (int i = 0; i < horizon; ++i) out.knots[static_cast<std::size_t>(i) + 1] = pos.row(i).transpose();
  out.reference = ReferenceTrajectory(out.knots, config.dt);
  return out;
}

}  // namespace ampcc
