#include "lowmot/bbd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lowmot {

double clip_tau(double delta_tau, const BbdParams& params) {
  return std::min(std::max(delta_tau, params.alpha), params.beta);
}

GatingCovariance gating_covariance(double w, double h, double delta_tau,
                                   const BbdParams& params) {
  if (!(w > 0.0 && h > 0.0)) {
    throw std::invalid_argument("gating_covariance: box size must be > 0");
  }
  const double clip = clip_tau(delta_tau, params);
  const double cw = params.c * w;
  const double ch = params.c * h;
  return {cw * cw * clip, ch * ch * clip};
}

double bbd(std::pair<double, double> predicted_center,
           std::pair<double, double> detected_center,
           const GatingCovariance& cov) {
  const double dx = detected_center.first - predicted_center.first;
  const double dy = detected_center.second - predicted_center.second;
  return std::sqrt(dx * dx / cov.var_x + dy * dy / cov.var_y);
}

double mahalanobis_center_distance(std::pair<double, double> predicted_center,
                                   std::pair<double, double> detected_center,
                                   const Eigen::Matrix2d& center_cov) {
  Eigen::Vector2d residual(detected_center.first - predicted_center.first,
                           detected_center.second - predicted_center.second);
  Eigen::LLT<Eigen::Matrix2d> llt(center_cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "mahalanobis_center_distance: covariance not positive definite");
  }
  return std::sqrt(residual.dot(llt.solve(residual)));
}

}  // namespace lowmot
