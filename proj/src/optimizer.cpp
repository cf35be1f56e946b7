#include "ampcc/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace ampcc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinePoint {
  double alpha = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
};

// Minimizer of the cubic through (a.alpha, a.phi, a.dphi), (b.alpha, b.phi,
// b.dphi), safeguarded to the interior of [lo, hi]; falls back to bisection.
double interpolate_step(const LinePoint& a, const LinePoint& b, double lo,
                        double hi) {
  const double d1 = a.dphi + b.dphi - 3.0 * (a.phi - b.phi) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  double alpha = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.dphi - a.dphi + 2.0 * d2;
    if (denom != 0.0) {
      alpha = b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / denom;
    }
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(alpha) || alpha < lo + margin || alpha > hi - margin) {
    alpha = 0.5 * (lo + hi);
  }
  return alpha;
}

}  // namespace

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kGradientTolerance: return "gradient_tolerance";
    case TerminationReason::kCostStall: return "cost_stall";
    case TerminationReason::kMaxIterations: return "max_iterations";
    case TerminationReason::kTimeLimit: return "time_limit";
    case TerminationReason::kLineSearchFailure: return "line_search_failure";
    case TerminationReason::kAlreadyOptimal: return "already_optimal";
  }
  return "unknown";
}

MinimizeResult minimize(const Objective& objective, const VecX& x0,
                        const OptimizeOptions& options) {
  options.validate();
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&t_start]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  const int n = static_cast<int>(x0.size());
  VecX x = x0;
  VecX grad(n);
  double cost = objective(x, grad);
  if (!std::isfinite(cost) || !grad.allFinite()) {
    throw NonFiniteError("objective at x0", 0);
  }

  MinimizeResult result;
  result.x = x;
  result.report.final_cost = cost;
  result.report.gradient_inf_norm = grad.lpNorm<Eigen::Infinity>();

  if (result.report.gradient_inf_norm <= options.gradient_tolerance) {
    result.report.reason = TerminationReason::kAlreadyOptimal;
    result.report.converged = true;
    result.report.wall_time_s = elapsed();
    return result;
  }

  // L-BFGS history of (s, y, 1/s.y).
  struct Pair {
    VecX s, y;
    double rho;
  };
  std::deque<Pair> history;

  // phi(alpha) along direction d from x; trial state cached for acceptance.
  VecX x_trial(n), grad_trial(n);
  VecX d(n);
  auto eval_phi = [&](double alpha, LinePoint& out) {
    x_trial = x + alpha * d;
    double f = objective(x_trial, grad_trial);
    if (!std::isfinite(f) || !grad_trial.allFinite()) f = kInf;
    out.alpha = alpha;
    out.phi = f;
    out.dphi = std::isfinite(f) ? grad_trial.dot(d) : kInf;
    return f;
  };

  const double c1 = options.wolfe_sufficient_decrease;
  const double c2 = options.wolfe_curvature;

  auto reason = TerminationReason::kMaxIterations;
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (options.max_wall_time > 0.0 && elapsed() >= options.max_wall_time) {
      reason = TerminationReason::kTimeLimit;
      break;
    }

    // Two-loop recursion with H0 = gamma I.
    d = -grad;
    std::vector<double> alpha_corr(history.size());
    for (int k = static_cast<int>(history.size()) - 1; k >= 0; --k) {
      alpha_corr[k] = history[k].rho * history[k].s.dot(d);
      d -= alpha_corr[k] * history[k].y;
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      const double yy = last.y.squaredNorm();
      if (yy > 0.0) d *= last.s.dot(last.y) / yy;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const double beta = history[k].rho * history[k].y.dot(d);
      d += (alpha_corr[k] - beta) * history[k].s;
    }

    double dphi0 = grad.dot(d);
    if (!(dphi0 < 0.0)) {
      // Curvature estimate failed to give descent: restart from steepest.
      history.clear();
      d = -grad;
      dphi0 = -grad.squaredNorm();
    }

    // Strong-Wolfe search (bracket + zoom).
    const double phi0 = cost;
    double alpha = history.empty()
                       ? std::min(1.0, 1.0 / std::max(1e-12, result.report
                                                                  .gradient_inf_norm))
                       : 1.0;
    LinePoint prev{0.0, phi0, dphi0};
    LinePoint curr;
    bool accepted = false;
    bool bracketed = false;
    LinePoint blo, bhi;

    for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
      eval_phi(alpha, curr);
      if (curr.phi > phi0 + c1 * alpha * dphi0 ||
          (ls > 0 && curr.phi >= prev.phi) || !std::isfinite(curr.phi)) {
        blo = prev;
        bhi = curr;
        bracketed = true;
        break;
      }
      if (std::abs(curr.dphi) <= -c2 * dphi0) {
        accepted = true;
        break;
      }
      if (curr.dphi >= 0.0) {
        blo = curr;
        bhi = prev;
        bracketed = true;
        break;
      }
      prev = curr;
      alpha *= 2.0;
    }

    if (bracketed && !accepted) {
      for (int zi = 0; zi < options.max_line_search_steps; ++zi) {
        const double lo = std::min(blo.alpha, bhi.alpha);
        const double hi = std::max(blo.alpha, bhi.alpha);
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
        double aj;
        if (!std::isfinite(bhi.phi)) {
          aj = 0.5 * (blo.alpha + bhi.alpha);
        } else {
          aj = interpolate_step(blo, bhi, lo, hi);
        }
        eval_phi(aj, curr);
        if (!std::isfinite(curr.phi) ||
            curr.phi > phi0 + c1 * aj * dphi0 || curr.phi >= blo.phi) {
          bhi = curr;
        } else {
          if (std::abs(curr.dphi) <= -c2 * dphi0) {
            accepted = true;
            break;
          }
          if (curr.dphi * (bhi.alpha - blo.alpha) >= 0.0) bhi = blo;
          blo = curr;
        }
      }
      if (!accepted && std::isfinite(blo.phi) && blo.alpha > 0.0 &&
          blo.phi <= phi0 + c1 * blo.alpha * dphi0) {
        // Armijo holds at the low bracket point: accept it without the
        // curvature condition rather than discard the decrease.
        eval_phi(blo.alpha, curr);
        accepted = true;
      }
    }

    if (!accepted || !(curr.phi < phi0)) {
      reason = TerminationReason::kLineSearchFailure;
      break;
    }

    // Accept the step.
    VecX s = x_trial - x;
    VecX y = grad_trial - grad;
    x = x_trial;
    const double prev_cost = cost;
    cost = curr.phi;
    grad = grad_trial;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      history.push_back({std::move(s), std::move(y), 1.0 / sy});
      while (static_cast<int>(history.size()) > options.history) {
        history.pop_front();
      }
    }

    result.x = x;
    result.report.final_cost = cost;
    result.report.gradient_inf_norm = grad.lpNorm<Eigen::Infinity>();
    if (options.on_iteration) options.on_iteration(iter + 1, cost, x);

    if (result.report.gradient_inf_norm <= options.gradient_tolerance) {
      reason = TerminationReason::kGradientTolerance;
      converged = true;
      ++iter;
      break;
    }
    if (prev_cost - cost <=
        options.relative_cost_tolerance * std::max(1.0, std::abs(cost))) {
      reason = TerminationReason::kCostStall;
      converged = true;
      ++iter;
      break;
    }
  }

  result.report.reason = reason;
  result.report.converged = converged;
  result.report.iterations = iter;
  result.report.wall_time_s = elapsed();
  return result;
}

GradientCheck check_gradient(const Objective& objective, const VecX& x,
                             double step) {
  if (!(step > 0.0)) throw ContractError("check_gradient: step must be > 0");
  const int n = static_cast<int>(x.size());
  VecX grad(n), scratch(n);
  objective(x, grad);

  GradientCheck out;
  VecX xp = x;
  for (int i = 0; i < n; ++i) {
    const double xi = x(i);
    xp(i) = xi + step;
    const double fp = objective(xp, scratch);
    xp(i) = xi - step;
    const double fm = objective(xp, scratch);
    xp(i) = xi;
    const double numeric = (fp - fm) / (2.0 * step);
    const double denom =
        std::max({1.0, std::abs(grad(i)), std::abs(numeric)});
    const double rel = std::abs(grad(i) - numeric) / denom;
    if (rel > out.max_relative_error) {
      out.max_relative_error = rel;
      out.worst_index = i;
      out.analytic_at_worst = grad(i);
      out.numeric_at_worst = numeric;
    }
  }
  return out;
}

}  // namespace ampcc
