#include "ampcc/high_mpcc.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ampcc/linear_system.hpp"
#include "ampcc/low_mpc.hpp"

namespace ampcc {

void HighMpccConfig::validate() const {
  if (horizon < 1) throw ConfigError("high_mpcc.horizon must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("high_mpcc.dt must be positive");
  if (lambda_similarity < 0.0 || lambda_progress < 0.0 || lambda_adaptive < 0.0 ||
      lambda_clearance < 0.0 || lambda_feasibility < 0.0)
    throw ConfigError("high_mpcc weights must be non-negative");
  if (speed_threshold < 0.0) throw ConfigError("high_mpcc.speed_threshold must be >= 0");
  if (!(clearance_threshold > 0.0))
    throw ConfigError("high_mpcc.clearance_threshold must be positive");
  if (!(speed_smooth_eps > 0.0)) throw ConfigError("high_mpcc.speed_smooth_eps must be > 0");
  for (const Bound* b : {&v_bound, &a_bound, &j_bound, &v_theta_bound}) {
    if (!(b->lo < b->hi)) throw ConfigError("high_mpcc bounds need lo < hi");
  }
  easa.validate();
  optimizer.validate();
}

double feasibility_penalty(double d, const Bound& b) {
  if (d < b.lo) {
    const double e = b.lo - d;
    return e * e * e;
  }
  if (d > b.hi) {
    const double e = d - b.hi;
    return e * e * e;
  }
  return 0.0;
}

double feasibility_penalty_derivative(double d, const Bound& b) {
  if (d < b.lo) {
    const double e = b.lo - d;
    return -3.0 * e * e;
  }
  if (d > b.hi) {
    const double e = d - b.hi;
    return 3.0 * e * e;
  }
  return 0.0;
}

ReferenceTrajectory::Sample progress_coupling(const ReferenceTrajectory& ref, double theta) {
  return ref.eval(theta);
}

namespace {

struct EvalDiag {
  const char* term = nullptr;
  int step = -1;
};

/// Core evaluation. Never throws on non-finite values: returns the
/// (possibly infinite) total and records the first offending term in
/// `diag`, so the line search can reject bad trial points.
double evaluate_objective(const VecX& U, const ReferenceTrajectory& ref,
                          const EsdfField& esdf, const FullState& s0,
                          const HighMpccConfig& cfg, const BatchMaps& batch,
                          VecX* gradient, HighCostTerms* terms_out, EvalDiag* diag) {
  const int N = cfg.horizon;

  Eigen::MatrixXd S[4];
  VecX s0v(3);
  for (int axis = 0; axis < 4; ++axis) {
    if (axis < 3) {
      s0v << s0.position[axis], s0.velocity[axis], s0.acceleration[axis];
    } else {
      s0v << s0.theta, s0.v_theta, s0.a_theta;
    }
    S[axis] = batch.apply(s0v, U.segment(axis * N, N));
    if (!S[axis].allFinite()) {
      if (diag && diag->term == nullptr) {
        diag->term = "rollout";
        for (int i = 0; i < N && diag->step < 0; ++i)
          if (!S[axis].row(i).allFinite()) diag->step = i + 1;
      }
      if (gradient) gradient->setZero(4 * N);
      return std::numeric_limits<double>::infinity();
    }
  }

  HighCostTerms T;
  Eigen::MatrixXd G[4];
  if (gradient) {
    for (auto& g : G) g = Eigen::MatrixXd::Zero(N, 3);
  }
  VecX direct;
  if (gradient) direct = VecX::Zero(4 * N);

  auto note = [&](const char* term, double accumulated, int step) {
    if (diag && diag->term == nullptr && !std::isfinite(accumulated)) {
      diag->term = term;
      diag->step = step;
    }
  };

  for (int i = 0; i < N; ++i) {
    const Vec3 p(S[0](i, 0), S[1](i, 0), S[2](i, 0));
    const Vec3 v(S[0](i, 1), S[1](i, 1), S[2](i, 1));
    const double theta = S[3](i, 0);
    const double v_theta = S[3](i, 1);

    // Similarity to the reference point at the trajectory's own progress.
    const auto rs = ref.eval(theta);
    const Vec3 e = p - rs.position;
    T.similarity += e.squaredNorm();
    note("similarity", T.similarity, i + 1);
    if (gradient) {
      for (int mu = 0; mu < 3; ++mu) G[mu](i, 0) += cfg.lambda_similarity * 2.0 * e[mu];
      G[3](i, 0) += cfg.lambda_similarity * (-2.0 * e.dot(rs.velocity));
    }

    // Progress reward (negative cost on progress speed).
    T.progress += -cfg.dt * v_theta;
    note("progress", T.progress, i + 1);
    if (gradient) G[3](i, 1) += cfg.lambda_progress * (-cfg.dt);

    bool clamped[3];
    const Vec3 q = esdf.clamp_to_query_bounds(p, clamped);
    const EsdfQueryFull qf = esdf.query_full(q);
    const double Fc = clearance_penalty(qf.value, cfg.clearance_threshold);
    const double dFc = clearance_penalty_derivative(qf.value, cfg.clearance_threshold);

    T.clearance += Fc;
    note("clearance", T.clearance, i + 1);
    if (gradient && dFc != 0.0) {
      for (int mu = 0; mu < 3; ++mu)
        if (!clamped[mu]) G[mu](i, 0) += cfg.lambda_clearance * dFc * qf.gradient[mu];
    }

    // Adaptive risk term: eta(beta) F_c (||v|| - v_thr)^2. Everything in it
    // vanishes when F_c and its derivative do, so skip cleanly outside the
    // activation band.
    if (Fc > 0.0) {
      const double spd =
          std::sqrt(v.squaredNorm() + cfg.speed_smooth_eps * cfg.speed_smooth_eps);
      const double dev = spd - cfg.speed_threshold;
      const double w = dev * dev;
      const double beta = easa_beta(v, qf.gradient, cfg.easa);
      const double eta = easa_eta(beta, cfg.easa);
      T.adaptive += eta * Fc * w;
      note("adaptive", T.adaptive, i + 1);
      if (gradient) {
        const double deta = easa_eta_derivative(beta, cfg.easa);
        const BetaDerivatives bd = easa_beta_derivatives(v, qf.gradient, cfg.easa);
        const Vec3 beta_pos = easa_beta_position_chain(bd, qf.hessian);
        for (int mu = 0; mu < 3; ++mu) {
          if (!clamped[mu]) {
            G[mu](i, 0) += cfg.lambda_adaptive *
                           (deta * beta_pos[mu] * Fc * w + eta * dFc * qf.gradient[mu] * w);
          }
          G[mu](i, 1) += cfg.lambda_adaptive *
                         (deta * bd.d_v[mu] * Fc * w + eta * Fc * 2.0 * dev * v[mu] / spd);
        }
      }
    }

    // One-sided cubic feasibility penalties on v, a, jerk and v_theta.
    for (int mu = 0; mu < 3; ++mu) {
      const double a_mu = S[mu](i, 2);
      const double j_mu = U[mu * N + i];
      T.feasibility += feasibility_penalty(v[mu], cfg.v_bound) +
                       feasibility_penalty(a_mu, cfg.a_bound) +
                       feasibility_penalty(j_mu, cfg.j_bound);
      if (gradient) {
        G[mu](i, 1) += cfg.lambda_feasibility * feasibility_penalty_derivative(v[mu], cfg.v_bound);
        G[mu](i, 2) += cfg.lambda_feasibility * feasibility_penalty_derivative(a_mu, cfg.a_bound);
        direct[mu * N + i] +=
            cfg.lambda_feasibility * feasibility_penalty_derivative(j_mu, cfg.j_bound);
      }
    }
    T.feasibility += feasibility_penalty(v_theta, cfg.v_theta_bound);
    note("feasibility", T.feasibility, i + 1);
    if (gradient)
      G[3](i, 1) +=
          cfg.lambda_feasibility * feasibility_penalty_derivative(v_theta, cfg.v_theta_bound);
  }

  if (gradient) {
    gradient->resize(4 * N);
    for (int axis = 0; axis < 4; ++axis) {
      gradient->segment(axis * N, N) =
          batch.accumulate_input_gradient(G[axis]) + direct.segment(axis * N, N);
    }
  }
  if (terms_out) *terms_out = T;
  return T.weighted_total(cfg);
}

}  // namespace

double high_cost_and_gradient(const VecX& inputs, const ReferenceTrajectory& ref,
                              const EsdfField& esdf, const FullState& s0,
                              const HighMpccConfig& config, VecX& gradient,
                              HighCostTerms* terms) {
  config.validate();
  if (inputs.size() != 4 * config.horizon)
    throw ContractError("high_mpcc input vector must have length 4 * horizon");

  const IntegratorModel model(3, config.dt, config.horizon);
  const BatchMaps batch(model);
  EvalDiag diag;
  HighCostTerms local;
  const double total =
      evaluate_objective(inputs, ref, esdf, s0, config, batch, &gradient, &local, &diag);
  if (!std::isfinite(total))
    throw NonFiniteError(diag.term ? diag.term : "total", diag.step);
  if (terms) *terms = local;
  return total;
}

std::string format_solution_dump(const MpccSolution& sol) {
  std::ostringstream os;
  os << std::setprecision(6) << std::scientific;
  os << "iter  similarity    progress      adaptive      clearance     feasibility   total\n";
  for (const MpccIterate& it : sol.trace) {
    os << std::setw(4) << it.iteration << "  " << std::setw(12) << it.terms.similarity << "  "
       << std::setw(12) << it.terms.progress << "  " << std::setw(12) << it.terms.adaptive
       << "  " << std::setw(12) << it.terms.clearance << "  " << std::setw(12)
       << it.terms.feasibility << "  " << std::setw(12) << it.total << "\n";
  }
  os << "termination: " << to_string(sol.report.reason) << " after " << sol.report.iterations
     << " iterations, cost " << sol.cost << "\n";
  os << "flags: degraded=" << (sol.degraded ? 1 : 0)
     << " infeasible_start=" << (sol.infeasible_start ? 1 : 0) << "\n";
  return os.str();
}

MpccSolution solve_high_mpcc(const ReferenceTrajectory& ref, const EsdfField& esdf,
                             const FullState& s0, const HighMpccConfig& config,
                             const VecX& warm_start, int shift_steps) {
  config.validate();
  const int N = config.horizon;
  const IntegratorModel model(3, config.dt, N);
  const BatchMaps batch(model);

  VecX x0 = VecX::Zero(4 * N);
  if (warm_start.size() == 4 * N) {
    const int sh = std::max(0, shift_steps);
    for (int axis = 0; axis < 4; ++axis)
      for (int i = 0; i + sh < N; ++i) x0[axis * N + i] = warm_start[axis * N + i + sh];
  } else if (warm_start.size() != 0) {
    throw ContractError("high_mpcc warm start must be empty or length 4 * horizon");
  } else {
    // Cold start: ride the reference. Ramp the progress speed toward a cruise
    // value matched to the velocity cap, then choose spatial jerks whose
    // accelerations follow rho(theta(t)) along that ramp. Starting in the
    // moving basin matters: a zero-jerk start leaves the solver in a flat
    // stand-still valley it exits very slowly.
    const double dt = config.dt;
    const double dt2 = dt * dt;
    const double s_ref = std::max(ref.eval(s0.theta).velocity.norm(), 0.5);
    const double target = std::clamp(0.8 * config.v_bound.hi / s_ref,
                                     config.v_theta_bound.lo, config.v_theta_bound.hi);
    const double a_cap = 0.5 * config.a_bound.hi;
    const double j_cap = 0.5 * config.j_bound.hi;

    double th = s0.theta, vth = s0.v_theta, ath = s0.a_theta;
    Vec3 a_prev = s0.acceleration;
    for (int i = 0; i < N; ++i) {
      const double a_des = std::clamp((target - vth) / (2.0 * dt), -a_cap, a_cap);
      const double u_th = std::clamp((a_des - ath) / dt, -j_cap, j_cap);
      x0[3 * N + i] = u_th;
      th += vth * dt + 0.5 * ath * dt2 + u_th * dt2 * dt / 6.0;
      vth += ath * dt + 0.5 * u_th * dt2;
      ath += u_th * dt;
      const ReferenceTrajectory::Sample sample = ref.eval(th);
      const Vec3 a_spatial = sample.acceleration * (vth * vth) + sample.velocity * ath;
      for (int axis = 0; axis < 3; ++axis)
        x0[axis * N + i] = std::clamp((a_spatial[axis] - a_prev[axis]) / dt, -j_cap, j_cap);
      a_prev = a_spatial;
    }
  }

  MpccSolution sol;
  bool clamped[3];
  const Vec3 q0 = esdf.clamp_to_query_bounds(s0.position, clamped);
  sol.infeasible_start = esdf.query(q0).value <= 0.0;

  {
    EvalDiag diag;
    HighCostTerms t0;
    const double c0 = evaluate_objective(x0, ref, esdf, s0, config, batch, nullptr, &t0, &diag);
    if (!std::isfinite(c0)) throw NonFiniteError(diag.term ? diag.term : "total", diag.step);
    if (config.trace) sol.trace.push_back({0, t0, c0});
  }

  auto objective = [&](const VecX& u, VecX& grad) {
    return evaluate_objective(u, ref, esdf, s0, config, batch, &grad, nullptr, nullptr);
  };

  OptimizeOptions opts = config.optimizer;
  if (config.trace) {
    opts.on_iteration = [&](int iteration, double cost, const VecX& x) {
      HighCostTerms t;
      evaluate_objective(x, ref, esdf, s0, config, batch, nullptr, &t, nullptr);
      sol.trace.push_back({iteration, t, cost});
    };
  }

  const MinimizeResult res = minimize(objective, x0, opts);
  sol.inputs = res.x;
  sol.report = res.report;
  sol.degraded = (res.report.reason == TerminationReason::kLineSearchFailure);

  sol.cost = evaluate_objective(res.x, ref, esdf, s0, config, batch, nullptr, &sol.terms, nullptr);

  sol.states.resize(static_cast<std::size_t>(N));
  Eigen::MatrixXd S[4];
  VecX s0v(3);
  for (int axis = 0; axis < 4; ++axis) {
    if (axis < 3) {
      s0v << s0.position[axis], s0.velocity[axis], s0.acceleration[axis];
    } else {
      s0v << s0.theta, s0.v_theta, s0.a_theta;
    }
    S[axis] = batch.apply(s0v, res.x.segment(axis * N, N));
  }
  for (int i = 0; i < N; ++i) {
    FullState st;
    st.position = Vec3(S[0](i, 0), S[1](i, 0), S[2](i, 0));
    st.velocity = Vec3(S[0](i, 1), S[1](i, 1), S[2](i, 1));
    st.acceleration = Vec3(S[0](i, 2), S[1](i, 2), S[2](i, 2));
    st.theta = S[3](i, 0);
    st.v_theta = S[3](i, 1);
    st.a_theta = S[3](i, 2);
    sol.states[static_cast<std::size_t>(i)] = st;
  }
  return sol;
}

}  // namespace ampcc
