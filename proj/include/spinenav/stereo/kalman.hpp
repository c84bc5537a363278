#pragma once

#include "spinenav/stereo/camera.hpp"

namespace spinenav::stereo {

struct CornerObservation {
  int corner_id = 1;  // 1..4
  Pixel pixel = Pixel::Zero();
  double timestamp = 0.0;  // seconds
};

/// Constant-velocity filter tuning, in pixel units.
struct KalmanNoise {
  double process_accel = 100.0;    // white acceleration std-dev, px/s^2
  double measurement_var = 1.0;    // px^2
  double initial_var = 1e4;        // px^2 (and (px/s)^2) on first observation

  /// Throws InvalidArgument unless the variances are positive and the
  /// acceleration is non-negative.
  void validate() const;
};

/// Filter state (u, v, du/dt, dv/dt) for one corner in one camera.
struct CornerFilterState {
  Eigen::Vector4d state = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  double last_timestamp = 0.0;
  bool initialized = false;

  Pixel position() const { return state.head<2>(); }
  Eigen::Vector2d velocity() const { return state.tail<2>(); }
};

/// Predict over dt = obs.timestamp - last_timestamp, then correct with the
/// observed pixel. An uninitialized state is seeded from the observation
/// (position = pixel, zero velocity, diagonal covariance `initial_var`).
///
/// Throws NonMonotonicTimestamp when the observation is older than the state.
CornerFilterState kalman_update(const CornerFilterState& state, const CornerObservation& obs,
                                const KalmanNoise& noise = {});

}  // namespace spinenav::stereo
