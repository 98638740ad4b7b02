#include "lowmot/kalman.hpp"

#include <cmath>
#include <stdexcept>

namespace lowmot {

namespace {

constexpr double kMinBoxSize = 1.0;  // gating math divides by w^2 and h^2

void clamp_size(Vector8& mean) {
  if (mean(2) < kMinBoxSize) mean(2) = kMinBoxSize;
  if (mean(3) < kMinBoxSize) mean(3) = kMinBoxSize;
}

void symmetrize(Matrix8& cov) { cov = ((cov + cov.transpose()) * 0.5).eval(); }

// Joseph-form update, shared by both observation sizes.
template <int Dim>
KalmanState joseph_update(const KalmanState& state,
                          const Eigen::Matrix<double, Dim, 1>& z,
                          const Eigen::Matrix<double, Dim, 8>& H,
                          const Eigen::Matrix<double, Dim, Dim>& R) {
  const Eigen::Matrix<double, Dim, Dim> innovation_cov =
      H * state.cov * H.transpose() + R;
  Eigen::LLT<Eigen::Matrix<double, Dim, Dim>> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("kalman update: singular innovation covariance");
  }
  const Eigen::Matrix<double, 8, Dim> gain =
      llt.solve(H * state.cov).transpose();

  KalmanState out;
  out.mean = state.mean + gain * (z - H * state.mean);
  const Matrix8 ikh = Matrix8::Identity() - gain * H;
  out.cov = ikh * state.cov * ikh.transpose() + gain * R * gain.transpose();
  symmetrize(out.cov);
  clamp_size(out.mean);
  return out;
}

}  // namespace

KalmanModel::KalmanModel() {
  F = Matrix8::Identity();
  for (int i = 0; i < 4; ++i) F(i, i + 4) = 1.0;
  H6 = Matrix6x8::Zero();
  for (int i = 0; i < 6; ++i) H6(i, i) = 1.0;
  H4 = Matrix4x8::Zero();
  for (int i = 0; i < 4; ++i) H4(i, i) = 1.0;
}

Matrix8 KalmanModel::process_noise(double height) const {
  const double pos = process_pos_weight * height;
  const double vel = process_vel_weight * height;
  Vector8 stds;
  stds << pos, pos, pos, pos, vel, vel, vel, vel;
  return stds.array().square().matrix().asDiagonal();
}

Matrix6 KalmanModel::obs_noise_full(double height) const {
  const double pos = obs_pos_weight * height;
  const double vel = obs_vel_weight * height;
  Vector6 stds;
  stds << pos, pos, pos, pos, vel, vel;
  return stds.array().square().matrix().asDiagonal();
}

Matrix4 KalmanModel::obs_noise_box(double height) const {
  const double pos = obs_pos_weight * height;
  Vector4 stds;
  stds << pos, pos, pos, pos;
  return stds.array().square().matrix().asDiagonal();
}

KalmanState init_state(const BBox& box, const KalmanModel& model) {
  KalmanState state;
  const auto [cx, cy] = center(box);
  state.mean << cx, cy, box.width, box.height, 0, 0, 0, 0;
  const double pos_var =
      (model.obs_pos_weight * box.height) * (model.obs_pos_weight * box.height);
  Vector8 variances;
  variances << pos_var, pos_var, pos_var, pos_var, 1000.0 * pos_var,
      1000.0 * pos_var, 1000.0 * pos_var, 1000.0 * pos_var;
  state.cov = variances.asDiagonal();
  return state;
}

KalmanState predict(const KalmanState& state, const KalmanModel& model) {
  KalmanState out;
  out.mean = model.F * state.mean;
  out.cov = model.F * state.cov * model.F.transpose() +
            model.process_noise(state.h());
  symmetrize(out.cov);
  clamp_size(out.mean);
  return out;
}

KalmanState update6(const KalmanState& state, const Vector6& z,
                    const KalmanModel& model) {
  return update6(state, z, model, model.obs_noise_full(state.h()));
}

KalmanState update6(const KalmanState& state, const Vector6& z,
                    const KalmanModel& model, const Matrix6& obs_noise) {
  if (!z.allFinite()) throw std::invalid_argument("update6: non-finite z");
  return joseph_update<6>(state, z, model.H6, obs_noise);
}

KalmanState update4(const KalmanState& state, const Vector4& z,
                    const KalmanModel& model) {
  return update4(state, z, model, model.obs_noise_box(state.h()));
}

KalmanState update4(const KalmanState& state, const Vector4& z,
                    const KalmanModel& model, const Matrix4& obs_noise) {
  if (!z.allFinite()) throw std::invalid_argument("update4: non-finite z");
  return joseph_update<4>(state, z, model.H4, obs_noise);
}

}  // namespace lowmot
