#pragma once

#include <Eigen/Dense>

#include "lowmot/bbox.hpp"

namespace lowmot {

using Vector8 = Eigen::Matrix<double, 8, 1>;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;
using Matrix6x8 = Eigen::Matrix<double, 6, 8>;
using Matrix4x8 = Eigen::Matrix<double, 4, 8>;

// State layout: [cx, cy, w, h, vx, vy, vw, vh], velocities in pixels per
// filter step. One step spans half a detection interval in low-frequency
// mode, so a displacement measured over that half-interval feeds in as a
// velocity without rescaling.
struct KalmanState {
  Vector8 mean = Vector8::Zero();
  Matrix8 cov = Matrix8::Identity();

  double cx() const { return mean(0); }
  double cy() const { return mean(1); }
  double w() const { return mean(2); }
  double h() const { return mean(3); }
  double vx() const { return mean(4); }
  double vy() const { return mean(5); }
  BBox bbox() const { return bbox_from_center(cx(), cy(), w(), h()); }
};

// Constant-velocity model. The full observation covers the first six state
// components (positions, size and planar velocity); the reduced observation
// covers box geometry only, for times when no velocity measurement exists.
// Noise matrices are diagonal and scale with the box height, following the
// common 1/20 position, 1/160 velocity convention.
struct KalmanModel {
  Matrix8 F;
  Matrix6x8 H6;
  Matrix4x8 H4;
  double process_pos_weight = 1.0 / 20.0;
  double process_vel_weight = 1.0 / 160.0;
  double obs_pos_weight = 1.0 / 20.0;
  double obs_vel_weight = 1.0 / 10.0;

  KalmanModel();

  Matrix8 process_noise(double height) const;
  Matrix6 obs_noise_full(double height) const;
  Matrix4 obs_noise_box(double height) const;
};

/// New-tracklet state: box from the detection, zero velocity with an
/// uninformative (1000x) velocity variance.
KalmanState init_state(const BBox& box, const KalmanModel& model);

/// Advances one step: position moves by the stored velocity, covariance
/// grows by the process noise. Box size is clamped to >= 1 px.
KalmanState predict(const KalmanState& state, const KalmanModel& model);

/// Full update with observation [cx, cy, w, h, vx, vy].
KalmanState update6(const KalmanState& state, const Vector6& z,
                    const KalmanModel& model);
KalmanState update6(const KalmanState& state, const Vector6& z,
                    const KalmanModel& model, const Matrix6& obs_noise);

/// Reduced update with observation [cx, cy, w, h].
KalmanState update4(const KalmanState& state, const Vector4& z,
                    const KalmanModel& model);
KalmanState update4(const KalmanState& state, const Vector4& z,
                    const KalmanModel& model, const Matrix4& obs_noise);

}  // namespace lowmot
