#include "spinenav/stereo/kalman.hpp"

namespace spinenav::stereo {

void KalmanNoise::validate() const {
  if (!(measurement_var > 0.0)) throw Error(ErrorCode::InvalidArgument, "measurement variance must be > 0");
  if (!(initial_var > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial variance must be > 0");
  if (!(process_accel >= 0.0)) throw Error(ErrorCode::InvalidArgument, "process acceleration must be >= 0");
}

CornerFilterState kalman_update(const CornerFilterState& prior, const CornerObservation& obs,
                                const KalmanNoise& noise) {
  noise.validate();
  CornerFilterState out = prior;
  if (!prior.initialized) {
    out.state << obs.pixel.x(), obs.pixel.y(), 0.0, 0.0;
    out.covariance = Eigen::Matrix4d::Identity() * noise.initial_var;
    out.last_timestamp = obs.timestamp;
    out.initialized = true;
    return out;
  }
  if (obs.timestamp < prior.last_timestamp) {
    throw Error(ErrorCode::NonMonotonicTimestamp,
                "observation at t=" + std::to_string(obs.timestamp) +
                    " precedes filter time t=" + std::to_string(prior.last_timestamp));
  }

  const double dt = obs.timestamp - prior.last_timestamp;

  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;

  // Discretized white-noise acceleration.
  const double q = noise.process_accel * noise.process_accel;
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt2 * dt2;
  Eigen::Matrix4d qm = Eigen::Matrix4d::Zero();
  qm(0, 0) = qm(1, 1) = dt4 / 4.0 * q;
  qm(0, 2) = qm(2, 0) = qm(1, 3) = qm(3, 1) = dt3 / 2.0 * q;
  qm(2, 2) = qm(3, 3) = dt2 * q;

  const Eigen::Vector4d x_pred = f * prior.state;
  const Eigen::Matrix4d p_pred = f * prior.covariance * f.transpose() + qm;

  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * noise.measurement_var;

  const Eigen::Vector2d innovation = obs.pixel - h * x_pred;
  const Eigen::Matrix2d s = h * p_pred * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> k = p_pred * h.transpose() * s.inverse();

  // Joseph form keeps the covariance symmetric positive-definite.
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - k * h;
  Eigen::Matrix4d p = ikh * p_pred * ikh.transpose() + k * r * k.transpose();
  p = 0.5 * (p + p.transpose());

  out.state = x_pred + k * innovation;
  out.covariance = p;
  out.last_timestamp = obs.timestamp;
  return out;
}

}  // namespace spinenav::stereo
