#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lowmot/assignment.hpp"
#include "lowmot/bbd.hpp"
#include "lowmot/bbox.hpp"

namespace lowmot {

// Which spatial gate guards the first matching stage. The mahalanobis and
// none settings exist for baseline comparisons; production runs use bbd.
enum class Stage1Gate { kBbd, kMahalanobis, kNone };

struct AssociationConfig {
  double theta_bbd = 16.0;
  double theta_iou = 0.4;
  double theta_reid_high = 0.65;
  double theta_reid_low = 0.3;
  Stage1Gate stage1_gate = Stage1Gate::kBbd;
  bool two_stage = true;
  double theta_maha = 2.4477;  // sqrt of the 95% chi-square quantile, 2 dof
};

// Per-tracklet inputs to the gates: the box predicted at the association
// frame, the box size read from the filter state, staleness since the last
// successful update, and the filter's projected center covariance (used
// only by the mahalanobis variant).
struct TrackletGate {
  std::int64_t id;
  BBox box;
  double state_width;
  double state_height;
  double staleness;
  Eigen::Matrix2d center_cov = Eigen::Matrix2d::Identity();
};

struct AssociationMatch {
  std::int64_t tracklet_id;
  std::size_t tracklet_index;
  std::size_t detection_index;
  int stage;  // 1 or 2
  double similarity;
};

struct AssociationOutcome {
  std::vector<AssociationMatch> matches;
  std::vector<std::size_t> unmatched_tracklets;  // indices
  std::vector<std::size_t> unmatched_detections;
};

// Similarity matrix type: rows = tracklets, cols = detections, cosine
// similarities in [-1, 1].
using SimilarityMatrix = std::vector<std::vector<double>>;

/// Stage-1 costs: 1 - s where the spatial gate and the high appearance
/// threshold both pass, infeasible otherwise.
CostMatrix stage1_costs(const std::vector<TrackletGate>& tracklets,
                        const std::vector<BBox>& detections,
                        const SimilarityMatrix& similarity,
                        const AssociationConfig& config,
                        const BbdParams& bbd_params);

/// Stage-2 costs over stage-1 residuals: 1 - s where the overlap gate and
/// the low appearance threshold both pass.
CostMatrix stage2_costs(const std::vector<TrackletGate>& tracklets,
                        const std::vector<BBox>& detections,
                        const std::vector<std::size_t>& tracklet_subset,
                        const std::vector<std::size_t>& detection_subset,
                        const SimilarityMatrix& similarity,
                        const AssociationConfig& config);

/// Runs both stages: solve stage-1 costs, reject low-similarity survivors,
/// feed the residuals to stage 2. Deterministic for identical inputs.
AssociationOutcome associate(const std::vector<TrackletGate>& tracklets,
                             const std::vector<BBox>& detections,
                             const SimilarityMatrix& similarity,
                             const AssociationConfig& config,
                             const BbdParams& bbd_params);

}  // namespace lowmot
