#pragma once

#include <functional>
#include <string>

#include "ampcc/types.hpp"

namespace ampcc {

/// Cost-and-gradient callable: fills grad (same size as x) and returns cost.
using Objective = std::function<double(const VecX& x, VecX& grad)>;

struct OptimizeOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;       // inf-norm of the gradient
  double relative_cost_tolerance = 1e-9;  // relative per-iteration decrease
  double max_wall_time = 0.0;             // seconds; <= 0 disables the cap
  double wolfe_sufficient_decrease = 1e-4;
  double wolfe_curvature = 0.9;
  int history = 8;
  int max_line_search_steps = 40;
  /// Invoked after every accepted iterate (diagnostics / tracing).
  std::function<void(int iteration, double cost, const VecX& x)> on_iteration;

  void validate() const {
    if (max_iterations < 1) throw ContractError("optimizer: max_iterations >= 1");
    if (!(gradient_tolerance > 0.0) || !(relative_cost_tolerance > 0.0)) {
      throw ContractError("optimizer: tolerances must be > 0");
    }
    if (!(wolfe_sufficient_decrease > 0.0) ||
        !(wolfe_curvature > wolfe_sufficient_decrease) ||
        !(wolfe_curvature < 1.0)) {
      throw ContractError("optimizer: need 0 < c1 < c2 < 1");
    }
    if (history < 1) throw ContractError("optimizer: history >= 1");
  }
};

enum class TerminationReason {
  kGradientTolerance,
  kCostStall,
  kMaxIterations,
  kTimeLimit,
  kLineSearchFailure,
  kAlreadyOptimal,
};

std::string to_string(TerminationReason reason);

struct OptimizeReport {
  TerminationReason reason = TerminationReason::kMaxIterations;
  int iterations = 0;
  double final_cost = 0.0;
  double gradient_inf_norm = 0.0;
  double wall_time_s = 0.0;
  /// True when a tolerance fired; false for caps and line-search failure
  /// (the returned iterate is still the best one seen).
  bool converged = false;
};

struct MinimizeResult {
  VecX x;
  OptimizeReport report;
};

/// Limited-memory quasi-Newton descent with a strong-Wolfe line search.
/// The cost sequence is monotone non-increasing; non-finite trial costs are
/// treated as +infinity and rejected inside the line search.
/// Throws NonFiniteError if the objective is non-finite at x0.
MinimizeResult minimize(const Objective& objective, const VecX& x0,
                        const OptimizeOptions& options);

struct GradientCheck {
  double max_relative_error = 0.0;
  int worst_index = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

/// Central-difference check of the objective's gradient at x. The per
/// coordinate error is |analytic - numeric| / max(1, |analytic|, |numeric|).
GradientCheck check_gradient(const Objective& objective, const VecX& x,
                             double step);

}  // namespace ampcc
