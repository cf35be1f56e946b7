#include "ampcc/linear_system.hpp"

namespace ampcc {

IntegratorModel::IntegratorModel(int order, double dt, int horizon)
    : order_(order), dt_(dt), horizon_(horizon) {
  if (order != 1 && order != 3) {
    throw ContractError("IntegratorModel: order must be 1 or 3");
  }
  if (!(dt > 0.0)) throw ContractError("IntegratorModel: dt must be > 0");
  if (horizon < 1) throw ContractError("IntegratorModel: horizon must be >= 1");

  A_.setIdentity(order, order);
  B_.resize(order);
  if (order == 1) {
    B_(0) = dt;
  } else {
    A_(0, 1) = dt;
    A_(0, 2) = 0.5 * dt * dt;
    A_(1, 2) = dt;
    B_(0) = dt * dt * dt / 6.0;
    B_(1) = 0.5 * dt * dt;
    B_(2) = dt;
  }
}

Eigen::VectorXd IntegratorModel::step(const Eigen::VectorXd& s,
                                      double u) const {
  if (s.size() != order_) {
    throw ContractError("IntegratorModel::step: state size mismatch");
  }
  return A_ * s + B_ * u;
}

Eigen::MatrixXd IntegratorModel::rollout(const Eigen::VectorXd& s0,
                                         const Eigen::VectorXd& U) const {
  if (s0.size() != order_) {
    throw ContractError("IntegratorModel::rollout: state size mismatch");
  }
  if (U.size() != horizon_) {
    throw ContractError("IntegratorModel::rollout: |U| must equal horizon");
  }
  Eigen::MatrixXd S(horizon_, order_);
  Eigen::VectorXd s = s0;
  for (int i = 0; i < horizon_; ++i) {
    s = A_ * s + B_ * U(i);
    S.row(i) = s.transpose();
  }
  return S;
}

BatchMaps::BatchMaps(const IntegratorModel& model) : model_(model) {
  const int H = model_.horizon();
  powA_.resize(H + 1);
  powAB_.resize(H);
  powA_[0].setIdentity(model_.order(), model_.order());
  for (int k = 1; k <= H; ++k) powA_[k] = model_.step_matrix() * powA_[k - 1];
  for (int k = 0; k < H; ++k) powAB_[k] = powA_[k] * model_.input_matrix();
}

Eigen::MatrixXd BatchMaps::apply(const Eigen::VectorXd& s0,
                                 const Eigen::VectorXd& U) const {
  return model_.rollout(s0, U);
}

const Eigen::VectorXd& BatchMaps::input_block(int i, int j) const {
  if (i < 1 || i > model_.horizon() || j < 1 || j > i) {
    throw ContractError("BatchMaps::input_block: need 1 <= j <= i <= H");
  }
  return powAB_[i - j];
}

const Eigen::MatrixXd& BatchMaps::initial_block(int i) const {
  if (i < 1 || i > model_.horizon()) {
    throw ContractError("BatchMaps::initial_block: need 1 <= i <= H");
  }
  return powA_[i];
}

Eigen::VectorXd BatchMaps::state_jacobian_row(int i, int derivative_level) const {
  const int H = model_.horizon();
  if (i < 1 || i > H) {
    throw ContractError("BatchMaps::state_jacobian_row: need 1 <= i <= H");
  }
  if (derivative_level < 0 || derivative_level >= model_.order()) {
    throw ContractError(
        "BatchMaps::state_jacobian_row: derivative_level must be < order");
  }
  Eigen::VectorXd row = Eigen::VectorXd::Zero(H);
  for (int j = 1; j <= i; ++j) row(j - 1) = powAB_[i - j](derivative_level);
  return row;
}

Eigen::VectorXd BatchMaps::accumulate_input_gradient(
    const Eigen::MatrixXd& state_gradients) const {
  const int H = model_.horizon();
  const int d = model_.order();
  if (state_gradients.rows() != H || state_gradients.cols() != d) {
    throw ContractError(
        "BatchMaps::accumulate_input_gradient: gradient shape must be H x d");
  }
  Eigen::VectorXd grad_u(H);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd At = model_.step_matrix().transpose();
  for (int i = H; i >= 1; --i) {
    lambda = state_gradients.row(i - 1).transpose() + At * lambda;
    grad_u(i - 1) = model_.input_matrix().dot(lambda);
  }
  return grad_u;
}

}  // namespace ampcc
