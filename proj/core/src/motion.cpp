#include "motsim/motion.hpp"

#include <cmath>
#include <stdexcept>

namespace motsim {

namespace {

Eigen::Vector4d box_to_measurement(const BoundingBox& box) {
  return {box.center_x(), box.center_y(), box.aspect(), box.height()};
}

}  // namespace

BoundingBox KalmanState::to_box() const {
  const double height = std::max(mean(3), 1e-6);
  const double width = std::max(mean(2) * height, 1e-6);
  return BoundingBox::from_center(mean(0), mean(1), width, height);
}

KalmanFilter::KalmanFilter(const KalmanConfig& config) : config_(config) {
  transition_ = Eigen::Matrix<double, 8, 8>::Identity();
  for (int i = 0; i < 4; ++i) transition_(i, i + 4) = 1.0;
  observation_ = Eigen::Matrix<double, 4, 8>::Zero();
  for (int i = 0; i < 4; ++i) observation_(i, i) = 1.0;
}

KalmanState KalmanFilter::init(const BoundingBox& measurement) const {
  KalmanState state;
  state.mean.head<4>() = box_to_measurement(measurement);
  const double h = measurement.height();
  Eigen::Matrix<double, 8, 1> std;
  const double pos = config_.initial_position_std_weight * h;
  const double vel = config_.initial_velocity_std_weight * h;
  std << pos, pos, 1e-2, pos, vel, vel, 1e-5, vel;
  state.covariance = std.array().square().matrix().asDiagonal();
  return state;
}

KalmanState KalmanFilter::predict(const KalmanState& state) const {
  const double h = std::max(state.mean(3), 1e-6);
  const double pos = config_.process_position_std_weight * h;
  const double vel = config_.process_velocity_std_weight * h;
  Eigen::Matrix<double, 8, 1> std;
  std << pos, pos, 1e-2, pos, vel, vel, 1e-5, vel;

  KalmanState out;
  out.mean = transition_ * state.mean;
  out.covariance = transition_ * state.covariance * transition_.transpose() +
                   Eigen::Matrix<double, 8, 8>(
                       std.array().square().matrix().asDiagonal());
  out.covariance = ((out.covariance + out.covariance.transpose()) / 2.0).eval();
  return out;
}

KalmanState KalmanFilter::update(const KalmanState& state,
                                 const BoundingBox& measurement) const {
  const Eigen::Vector4d z = box_to_measurement(measurement);
  if (!z.allFinite()) {
    throw std::invalid_argument("kalman update: non-finite measurement");
  }

  const double h = std::max(state.mean(3), 1e-6);
  const double m = config_.measurement_std_weight * h;
  Eigen::Vector4d std;
  std << m, m, 1e-1 * config_.measurement_std_weight, m;
  Eigen::Matrix4d noise = std.array().square().matrix().asDiagonal();

  Eigen::Matrix4d innovation_cov =
      observation_ * state.covariance * observation_.transpose() + noise;
  // Tiny ridge keeps the solve well posed when both the prior and the
  // measurement noise have collapsed to zero.
  innovation_cov += 1e-12 * Eigen::Matrix4d::Identity();

  const Eigen::Matrix<double, 8, 4> gain =
      innovation_cov.ldlt()
          .solve(observation_ * state.covariance)
          .transpose();

  KalmanState out;
  out.mean = state.mean + gain * (z - observation_ * state.mean);
  const Eigen::Matrix<double, 8, 8> residual_op =
      Eigen::Matrix<double, 8, 8>::Identity() - gain * observation_;
  out.covariance = residual_op * state.covariance * residual_op.transpose() +
                   gain * noise * gain.transpose();
  out.covariance = ((out.covariance + out.covariance.transpose()) / 2.0).eval();
  return out;
}

Eigen::Vector2d estimate_velocity(
    const std::vector<std::pair<int, Eigen::Vector2d>>& history, int window) {
  const int n = static_cast<int>(history.size());
  const int take = std::min(n, std::max(window, 1));
  if (take < 2) return Eigen::Vector2d::Zero();

  // Least-squares slope over the trailing window, frame index as abscissa.
  // Centered form for numerical stability.
  double mean_t = 0.0;
  Eigen::Vector2d mean_p = Eigen::Vector2d::Zero();
  for (int i = n - take; i < n; ++i) {
    mean_t += history[i].first;
    mean_p += history[i].second;
  }
  mean_t /= take;
  mean_p /= take;
  double denom = 0.0;
  Eigen::Vector2d numer = Eigen::Vector2d::Zero();
  for (int i = n - take; i < n; ++i) {
    const double dt = history[i].first - mean_t;
    denom += dt * dt;
    numer += dt * (history[i].second - mean_p);
  }
  if (denom <= 0.0) return Eigen::Vector2d::Zero();
  Eigen::Vector2d slope = numer / denom;
  // Snap rounding residue on stationary histories to an exact zero.
  for (int c = 0; c < 2; ++c) {
    if (std::abs(slope(c)) < 1e-9) slope(c) = 0.0;
  }
  return slope;
}

}  // namespace motsim
