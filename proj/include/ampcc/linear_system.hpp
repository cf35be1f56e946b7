#pragma once

#include <vector>

#include "ampcc/types.hpp"

namespace ampcc {

/// Discrete d-th order integrator (d = 1 or 3) with piecewise-constant
/// input over steps of length dt.
///
/// d = 1:  A = [1], B = [dt]
/// d = 3:  A = [[1, dt, dt^2/2], [0, 1, dt], [0, 0, 1]],
///         B = [dt^3/6, dt^2/2, dt]^T
class IntegratorModel {
 public:
  IntegratorModel(int order, double dt, int horizon);

  int order() const { return order_; }
  double dt() const { return dt_; }
  int horizon() const { return horizon_; }

  const Eigen::MatrixXd& step_matrix() const { return A_; }   // d x d
  const Eigen::VectorXd& input_matrix() const { return B_; }  // d x 1

  /// One step: s' = A s + B u.
  Eigen::VectorXd step(const Eigen::VectorXd& s, double u) const;

  /// States s_1..s_H from s_0 under inputs u_1..u_H (|U| must equal H).
  /// Row i of the result is s_{i+1}.
  Eigen::MatrixXd rollout(const Eigen::VectorXd& s0,
                          const Eigen::VectorXd& U) const;

 private:
  int order_;
  double dt_;
  int horizon_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd B_;
};

/// Batched input-to-state and initial-state maps for one axis:
/// stacking states s_1..s_H, S = A_batch U + B_batch s_0 with
/// A_batch block (i, j) = A^(i-j) B for j <= i and B_batch block i = A^(i+1)
/// (blocks 0-based over s_1..s_H). Stored as the block-Toeplitz generators
/// {A^k B} and {A^k}; application is an O(H d) recurrence, never a dense
/// multiply.
class BatchMaps {
 public:
  explicit BatchMaps(const IntegratorModel& model);

  const IntegratorModel& model() const { return model_; }

  /// Same result as model().rollout, computed through the stored blocks.
  Eigen::MatrixXd apply(const Eigen::VectorXd& s0,
                        const Eigen::VectorXd& U) const;

  /// Input-to-state block d(s_i)/d(u_j) = A^(i-j) B, for 1 <= j <= i <= H.
  const Eigen::VectorXd& input_block(int i, int j) const;

  /// Initial-state block d(s_i)/d(s_0) = A^i, 1 <= i <= H.
  const Eigen::MatrixXd& initial_block(int i) const;

  /// Row of the batched input map for one state component:
  /// entry j-1 is d(state component `derivative_level` at step i)/d(u_j).
  /// derivative_level 0 is position, 1 velocity, 2 acceleration.
  Eigen::VectorXd state_jacobian_row(int i, int derivative_level) const;

  /// Adjoint accumulation: given per-step cost gradients g_i = d(cost)/d(s_i)
  /// (rows i = 1..H, zero rows allowed), returns d(cost)/d(u_j) for j = 1..H
  /// via the reverse recurrence lambda_i = g_i + A^T lambda_{i+1},
  /// grad_u_i = B^T lambda_i.
  Eigen::VectorXd accumulate_input_gradient(
      const Eigen::MatrixXd& state_gradients) const;

 private:
  IntegratorModel model_;
  std::vector<Eigen::VectorXd> powAB_;   // A^k B, k = 0..H-1
  std::vector<Eigen::MatrixXd> powA_;    // A^k, k = 0..H
};

}  // namespace ampcc
