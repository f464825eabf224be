#pragma once

#include <Eigen/Dense>
#include <vector>

#include "motsim/core.hpp"

namespace motsim {

/// Kalman state over (cx, cy, aspect, height) and their per-frame rates.
struct KalmanState {
  Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> covariance =
      Eigen::Matrix<double, 8, 8>::Identity();

  /// Box reconstructed from the current mean.
  BoundingBox to_box() const;
};

/// Noise magnitudes expressed as multiples of box height (scale-adaptive).
struct KalmanConfig {
  double measurement_std_weight = 1.0 / 20.0;
  double process_position_std_weight = 1.0 / 20.0;
  double process_velocity_std_weight = 1.0 / 160.0;
  double initial_position_std_weight = 1.0 / 10.0;
  double initial_velocity_std_weight = 1.0 / 16.0;
};

/// Constant-velocity filter on box center, aspect ratio and height.
class KalmanFilter {
 public:
  explicit KalmanFilter(const KalmanConfig& config = {});

  /// Mean position from the detection box, rates zero, diagonal covariance
  /// scaled by box height.
  KalmanState init(const BoundingBox& measurement) const;

  KalmanState predict(const KalmanState& state) const;

  /// Standard correction against the measured box. Throws on non-finite
  /// measurements. Covariance stays symmetric PSD (Joseph form).
  KalmanState update(const KalmanState& state,
                     const BoundingBox& measurement) const;

  const KalmanConfig& config() const { return config_; }

 private:
  KalmanConfig config_;
  Eigen::Matrix<double, 8, 8> transition_;
  Eigen::Matrix<double, 4, 8> observation_;
};

/// Least-squares slope of center positions over the last min(window, n)
/// samples, in pixels/frame. A single sample yields zero velocity.
/// History entries are (frame index, center) pairs; frame indices need not
/// be consecutive.
Eigen::Vector2d estimate_velocity(
    const std::vector<std::pair<int, Eigen::Vector2d>>& history, int window);

}  // namespace motsim
