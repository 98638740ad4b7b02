#include "lowmot/association.hpp"

#include <algorithm>
#include <stdexcept>

namespace lowmot {

namespace {

void check_dimensions(std::size_t n_tracklets, std::size_t n_detections,
                      const SimilarityMatrix& similarity) {
  if (similarity.size() != n_tracklets) {
    throw std::invalid_argument("association: similarity rows != tracklets");
  }
  for (const auto& row : similarity) {
    if (row.size() != n_detections) {
      throw std::invalid_argument(
          "association: similarity cols != detections");
    }
  }
}

bool stage1_gate_passes(const TrackletGate& t, const BBox& d,
                        const AssociationConfig& config,
                        const BbdParams& bbd_params) {
  switch (config.stage1_gate) {
    case Stage1Gate::kBbd: {
      const GatingCovariance cov = gating_covariance(
          t.state_width, t.state_height, t.staleness, bbd_params);
      return bbd(center(t.box), center(d), cov) < config.theta_bbd;
    }
    case Stage1Gate::kMahalanobis:
      return mahalanobis_center_distance(center(t.box), center(d),
                                         t.center_cov) < config.theta_maha;
    case Stage1Gate::kNone:
      return true;
  }
  return false;
}

}  // namespace

CostMatrix stage1_costs(const std::vector<TrackletGate>& tracklets,
                        const std::vector<BBox>& detections,
                        const SimilarityMatrix& similarity,
                        const AssociationConfig& config,
                        const BbdParams& bbd_params) {
  check_dimensions(tracklets.size(), detections.size(), similarity);
  CostMatrix costs(tracklets.size(), detections.size());
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const double s = similarity[i][j];
      if (s > config.theta_reid_high &&
          stage1_gate_passes(tracklets[i], detections[j], config,
                             bbd_params)) {
        costs(i, j) = std::max(0.0, 1.0 - s);
      }
    }
  }
  return costs;
}

CostMatrix stage2_costs(const std::vector<TrackletGate>& tracklets,
                        const std::vector<BBox>& detections,
                        const std::vector<std::size_t>& tracklet_subset,
                        const std::vector<std::size_t>& detection_subset,
                        const SimilarityMatrix& similarity,
                        const AssociationConfig& config) {
  check_dimensions(tracklets.size(), detections.size(), similarity);
  CostMatrix costs(tracklet_subset.size(), detection_subset.size());
  for (std::size_t r = 0; r < tracklet_subset.size(); ++r) {
    const std::size_t i = tracklet_subset[r];
    for (std::size_t c = 0; c < detection_subset.size(); ++c) {
      const std::size_t j = detection_subset[c];
      const double s = similarity[i][j];
      if (s > config.theta_reid_low &&
          iou(tracklets[i].box, detections[j]) > config.theta_iou) {
        costs(r, c) = std::max(0.0, 1.0 - s);
      }
    }
  }
  return costs;
}

AssociationOutcome associate(const std::vector<TrackletGate>& tracklets,
                             const std::vector<BBox>& detections,
                             const SimilarityMatrix& similarity,
                             const AssociationConfig& config,
                             const BbdParams& bbd_params) {
  check_dimensions(tracklets.size(), detections.size(), similarity);
  if (!(config.theta_reid_low < config.theta_reid_high)) {
    throw std::invalid_argument(
        "associate: theta_reid_low must be below theta_reid_high");
  }
  AssociationOutcome outcome;
  std::vector<char> tracklet_taken(tracklets.size(), 0);
  std::vector<char> detection_taken(detections.size(), 0);

  const CostMatrix c1 =
      stage1_costs(tracklets, detections, similarity, config, bbd_params);
  for (const MatchPair& p : solve(c1).pairs) {
    const double s = similarity[p.row][p.col];
    if (s <= config.theta_reid_high) continue;  // reject low-confidence pairs
    outcome.matches.push_back(
        {tracklets[p.row].id, p.row, p.col, 1, s});
    tracklet_taken[p.row] = 1;
    detection_taken[p.col] = 1;
  }

  std::vector<std::size_t> residual_tracklets;
  std::vector<std::size_t> residual_detections;
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    if (!tracklet_taken[i]) residual_tracklets.push_back(i);
  }
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!detection_taken[j]) residual_detections.push_back(j);
  }

  if (config.two_stage) {
    const CostMatrix c2 =
        stage2_costs(tracklets, detections, residual_tracklets,
                     residual_detections, similarity, config);
    for (const MatchPair& p : solve(c2).pairs) {
      const std::size_t i = residual_tracklets[p.row];
      const std::size_t j = residual_detections[p.col];
      const double s = similarity[i][j];
      if (s <= config.theta_reid_low) continue;
      outcome.matches.push_back({tracklets[i].id, i, j, 2, s});
      tracklet_taken[i] = 1;
      detection_taken[j] = 1;
    }
  }

  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    if (!tracklet_taken[i]) outcome.unmatched_tracklets.push_back(i);
  }
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!detection_taken[j]) outcome.unmatched_detections.push_back(j);
  }
  return outcome;
}

}  // namespace lowmot
