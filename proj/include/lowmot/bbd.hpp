#pragma once

#include <Eigen/Dense>

namespace lowmot {

// Clipping constants for the staleness-scaled gating covariance. Both
// bounds are in seconds of video time.
struct BbdParams {
  double alpha = 0.025;
  double beta = 0.25;
  double c = 1.0;
};

// Diagonal 2x2 covariance: ((c*w)^2 * clip, (c*h)^2 * clip). Built fresh
// per tracklet from the filter state's box size and the time since the
// tracklet's last successful update.
struct GatingCovariance {
  double var_x = 0.0;
  double var_y = 0.0;
};

/// Clamps a staleness interval into [alpha, beta].
double clip_tau(double delta_tau, const BbdParams& params);

GatingCovariance gating_covariance(double w, double h, double delta_tau,
                                   const BbdParams& params);

/// Center-residual distance whitened by the deterministic covariance:
/// sqrt(dx^2/var_x + dy^2/var_y). Zero iff the centers coincide.
double bbd(std::pair<double, double> predicted_center,
           std::pair<double, double> detected_center,
           const GatingCovariance& cov);

// Classical gating distance from the filter's own projected covariance.
// Kept as a comparator for pipeline variant experiments; the production
// gate is bbd().
double mahalanobis_center_distance(std::pair<double, double> predicted_center,
                                   std::pair<double, double> detected_center,
                                   const Eigen::Matrix2d& center_cov);

}  // namespace lowmot
