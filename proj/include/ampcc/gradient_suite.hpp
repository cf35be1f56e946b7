#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ampcc/config.hpp"

namespace ampcc {

/// Randomized end-to-end gradient validation of every cost term in both
/// planning layers, checked against central finite differences at the input
/// level (the same gradients the optimizer consumes).
struct GradientSuiteOptions {
  int trials = 50;           ///< random states per term (split across regimes)
  std::uint64_t seed = 1;
  double fd_step = 1e-6;
  bool inject_sign_flip = false;  ///< corrupt one term to prove the check bites
  GradientSuiteOptions() {}
};

struct TermReport {
  std::string term;          ///< "J_s", "J_c", "J_u", "f_s", "f_p", "f_e", "f_c", "f_d"
  double cluttered_error = 0.0;  ///< worst relative error among cluttered-map states
  double open_error = 0.0;       ///< worst relative error among obstacle-free states
  double worst() const { return cluttered_error > open_error ? cluttered_error : open_error; }
};

struct GradientSuiteResult {
  std::vector<TermReport> terms;
  double worst_cluttered = 0.0;
  double worst_open = 0.0;
  bool passed(double cluttered_tol, double open_tol) const {
    return worst_cluttered <= cluttered_tol && worst_open <= open_tol;
  }
};

GradientSuiteResult run_gradient_suite(const PlannerConfig& config,
                                       const GradientSuiteOptions& options);

}  // namespace ampcc
