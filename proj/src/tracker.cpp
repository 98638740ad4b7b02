#include "lowmot/tracker.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lowmot/kernels.hpp"

namespace lowmot {

namespace {

Vector4 box_observation(const BBox& box) {
  const auto [cx, cy] = center(box);
  Vector4 z;
  z << cx, cy, box.width, box.height;
  return z;
}

Eigen::Matrix2d projected_center_cov(const KalmanState& state,
                                     const KalmanModel& model) {
  const double r = model.obs_pos_weight * state.h();
  return state.cov.topLeftCorner<2, 2>() +
         Eigen::Matrix2d(Eigen::Vector2d(r * r, r * r).asDiagonal());
}

}  // namespace

Tracker::Tracker(PipelineConfig config) : config_(config) {
  if (!(config_.delta_t > 0.0)) {
    throw std::invalid_argument("Tracker: delta_t must be positive");
  }
  if (!(config_.ema_lambda > 0.0 && config_.ema_lambda < 1.0)) {
    throw std::invalid_argument("Tracker: ema_lambda must lie in (0,1)");
  }
  if (!(config_.t_live > 0.0)) {
    throw std::invalid_argument("Tracker: t_live must be positive");
  }
  if (!(config_.association.theta_reid_low <
        config_.association.theta_reid_high)) {
    throw std::invalid_argument(
        "Tracker: theta_reid_low must be below theta_reid_high");
  }
}

void Tracker::validate_step_time(
    double time_t, const std::vector<Detection>& detections) const {
  if (has_stepped_ && !(time_t > last_time_)) {
    throw std::invalid_argument("Tracker: mis-ordered step timestamps");
  }
  for (const Detection& d : detections) {
    if (std::abs(d.frame_time - time_t) > 1e-6) {
      throw std::invalid_argument(
          "Tracker: detection timestamp disagrees with the step time");
    }
  }
}

TrackOutput Tracker::step(const ImageFrame& frame_t,
                          const ImageFrame& frame_mid, double time_t,
                          double time_mid,
                          const std::vector<Detection>& detections) {
  if (config_.mode != TrackingMode::kLowFrequency) {
    throw std::logic_error("Tracker: low-frequency step in full mode");
  }
  validate_step_time(time_t, detections);
  if (!(time_mid < time_t)) {
    throw std::invalid_argument(
        "Tracker: intermediate frame must precede the detection frame");
  }
  counters_ = {};
  const double step_start = omp_get_wtime();

  // Backward propagation of detections to the intermediate frame.
  double t0 = omp_get_wtime();
  std::vector<BBox> det_boxes;
  det_boxes.reserve(detections.size());
  for (const Detection& d : detections) det_boxes.push_back(d.bbox);
  const std::vector<BBox> backward_boxes =
      backward_batch(det_boxes, frame_t, frame_mid, config_.vt);
  counters_.vt_calls += static_cast<long>(detections.size());

  // Forward propagation of tracklets, one tracker per model.
  std::vector<const MeanShiftModel*> models;
  std::vector<BBox> starts;
  models.reserve(tracklets_.size());
  starts.reserve(tracklets_.size());
  for (const Tracklet& t : tracklets_) {
    models.push_back(&t.vt_model);
    starts.push_back(t.origin_bbox);
  }
  const std::vector<VtResult> forward_results =
      track_batch(models, frame_mid, starts, config_.vt);
  counters_.vt_calls += static_cast<long>(tracklets_.size());
  timings_.vt_ms += (omp_get_wtime() - t0) * 1e3;

  // First predict, velocity seeded by the measured displacement when the
  // forward tracker held on.
  t0 = omp_get_wtime();
  std::vector<DisplacementObservation> displacements(tracklets_.size());
  std::vector<TrackletGate> gates;
  gates.reserve(tracklets_.size());
  for (std::size_t i = 0; i < tracklets_.size(); ++i) {
    Tracklet& t = tracklets_[i];
    DisplacementObservation obs{t.state.vx(), t.state.vy(),
                                DisplacementSource::kKalmanFallback};
    if (forward_results[i].converged) {
      const auto [ox, oy] = center(t.origin_bbox);
      const auto [fx, fy] = center(forward_results[i].bbox);
      obs = {fx - ox, fy - oy, DisplacementSource::kVisual};
      t.state.mean(4) = obs.vx;
      t.state.mean(5) = obs.vy;
    }
    displacements[i] = obs;
    t.state = predict(t.state, model_);
    ++counters_.kf_predicts;
    gates.push_back({t.id, t.state.bbox(), t.state.w(), t.state.h(),
                     time_mid - t.last_update_time,
                     projected_center_cov(t.state, model_)});
  }
  timings_.kalman_ms += (omp_get_wtime() - t0) * 1e3;

  // Association at the intermediate frame.
  t0 = omp_get_wtime();
  std::vector<Embedding> tracklet_embeddings;
  std::vector<Embedding> detection_embeddings;
  tracklet_embeddings.reserve(tracklets_.size());
  detection_embeddings.reserve(detections.size());
  for (const Tracklet& t : tracklets_) {
    tracklet_embeddings.push_back(t.ema_embedding);
  }
  for (const Detection& d : detections) {
    detection_embeddings.push_back(d.embedding);
  }
  const SimilarityMatrix similarity =
      similarity_matrix(tracklet_embeddings, detection_embeddings);
  const AssociationOutcome outcome = associate(
      gates, backward_boxes, similarity, config_.association, config_.bbd);
  timings_.association_ms += (omp_get_wtime() - t0) * 1e3;

  // Tracklet management: matched updates, second predict for everyone,
  // births and removals.
  t0 = omp_get_wtime();
  std::vector<const Detection*> matched_dets(tracklets_.size(), nullptr);
  for (const AssociationMatch& m : outcome.matches) {
    Tracklet& t = tracklets_[m.tracklet_index];
    update_matched(t, detections[m.detection_index],
                   backward_boxes[m.detection_index],
                   displacements[m.tracklet_index], &frame_t, time_t);
    matched_dets[m.tracklet_index] = &detections[m.detection_index];
  }
  for (std::size_t i = 0; i < tracklets_.size(); ++i) {
    if (matched_dets[i] != nullptr) continue;
    tracklets_[i].state = predict(tracklets_[i].state, model_);  // coast
    ++counters_.kf_predicts;
  }
  timings_.kalman_ms += (omp_get_wtime() - t0) * 1e3;

  create_new_tracklets(detections, outcome.unmatched_detections, &frame_t,
                       time_t);
  remove_old_tracklets(time_t);

  TrackOutput output = build_output(time_t);
  has_stepped_ = true;
  last_time_ = time_t;
  ++timings_.steps;
  last_step_ms_ = (omp_get_wtime() - step_start) * 1e3;
  return output;
}

TrackOutput Tracker::step(const ImageFrame& frame_t, double time_t,
                          const std::vector<Detection>& detections) {
  if (config_.mode != TrackingMode::kLowFrequency) {
    throw std::logic_error("Tracker: bootstrap step in full-frequency mode");
  }
  return step_at_current_frame(time_t, detections, &frame_t);
}

TrackOutput Tracker::step(double time_t,
                          const std::vector<Detection>& detections) {
  if (config_.mode != TrackingMode::kFullFrequency) {
    throw std::logic_error("Tracker: full-frequency step in low mode");
  }
  return step_at_current_frame(time_t, detections, nullptr);
}

TrackOutput Tracker::step_at_current_frame(
    double time_t, const std::vector<Detection>& detections,
    const ImageFrame* frame_for_models) {
  validate_step_time(time_t, detections);
  counters_ = {};
  const double step_start = omp_get_wtime();

  double t0 = omp_get_wtime();
  std::vector<TrackletGate> gates;
  gates.reserve(tracklets_.size());
  for (Tracklet& t : tracklets_) {
    t.state = predict(t.state, model_);
    ++counters_.kf_predicts;
    gates.push_back({t.id, t.state.bbox(), t.state.w(), t.state.h(),
                     time_t - t.last_update_time,
                     projected_center_cov(t.state, model_)});
  }
  timings_.kalman_ms += (omp_get_wtime() - t0) * 1e3;

  t0 = omp_get_wtime();
  std::vector<Embedding> tracklet_embeddings;
  std::vector<Embedding> detection_embeddings;
  std::vector<BBox> det_boxes;
  for (const Tracklet& t : tracklets_) {
    tracklet_embeddings.push_back(t.ema_embedding);
  }
  for (const Detection& d : detections) {
    detection_embeddings.push_back(d.embedding);
    det_boxes.push_back(d.bbox);
  }
  const SimilarityMatrix similarity =
      similarity_matrix(tracklet_embeddings, detection_embeddings);
  const AssociationOutcome outcome = associate(
      gates, det_boxes, similarity, config_.association, config_.bbd);
  timings_.association_ms += (omp_get_wtime() - t0) * 1e3;

  t0 = omp_get_wtime();
  for (const AssociationMatch& m : outcome.matches) {
    Tracklet& t = tracklets_[m.tracklet_index];
    const Detection& d = detections[m.detection_index];
    t.state = update4(t.state, box_observation(d.bbox), model_);
    ++counters_.kf_updates;
    t.ema_embedding = ema_fuse(t.ema_embedding, d.embedding,
                               config_.ema_lambda);
    t.last_update_time = time_t;
    t.origin_bbox = d.bbox;
    t.last_confidence = d.confidence;
    if (frame_for_models != nullptr) {
      try {
        t.vt_model = init_model(*frame_for_models, d.bbox,
                                config_.vt.bins_per_channel);
      } catch (const std::invalid_argument&) {
        // box without frame coverage: keep the previous appearance model
      }
    }
  }
  timings_.kalman_ms += (omp_get_wtime() - t0) * 1e3;

  create_new_tracklets(detections, outcome.unmatched_detections,
                       frame_for_models, time_t);
  remove_old_tracklets(time_t);

  TrackOutput output = build_output(time_t);
  has_stepped_ = true;
  last_time_ = time_t;
  ++timings_.steps;
  last_step_ms_ = (omp_get_wtime() - step_start) * 1e3;
  return output;
}

void Tracker::update_matched(Tracklet& tracklet, const Detection& detection,
                             const BBox& backward_box,
                             const DisplacementObservation& displacement,
                             const ImageFrame* frame_t, double time_t) {
  // Update at the intermediate frame. A measured displacement enters as a
  // direct velocity observation; the coasted fallback carries no new
  // velocity information, so only the box is observed then.
  if (displacement.source == DisplacementSource::kVisual) {
    const auto [bx, by] = center(backward_box);
    Vector6 z;
    z << bx, by, backward_box.width, backward_box.height, displacement.vx,
        displacement.vy;
    tracklet.state = update6(tracklet.state, z, model_);
  } else {
    tracklet.state = update4(tracklet.state, box_observation(backward_box),
                             model_);
  }
  ++counters_.kf_updates;

  // Second predict spans the back half-interval; the detection's motion
  // from the intermediate frame to now replaces the state velocity.
  const auto [bx, by] = center(backward_box);
  const auto [dx, dy] = center(detection.bbox);
  tracklet.state.mean(4) = dx - bx;
  tracklet.state.mean(5) = dy - by;
  tracklet.state = predict(tracklet.state, model_);
  ++counters_.kf_predicts;

  tracklet.state =
      update4(tracklet.state, box_observation(detection.bbox), model_);
  ++counters_.kf_updates;

  tracklet.ema_embedding =
      ema_fuse(tracklet.ema_embedding, detection.embedding, config_.ema_lambda);
  tracklet.last_update_time = time_t;
  tracklet.origin_bbox = detection.bbox;
  tracklet.last_confidence = detection.confidence;
  if (frame_t != nullptr) {
    try {
      tracklet.vt_model =
          init_model(*frame_t, detection.bbox, config_.vt.bins_per_channel);
    } catch (const std::invalid_argument&) {
      // box without frame coverage: keep the previous appearance model
    }
  }
}

void Tracker::create_new_tracklets(const std::vector<Detection>& detections,
                                   const std::vector<std::size_t>& unmatched,
                                   const ImageFrame* frame_t, double time_t) {
  for (const std::size_t j : unmatched) {
    const Detection& d = detections[j];
    if (d.confidence < config_.init_confidence) continue;
    Tracklet t{next_id_++,
               init_state(d.bbox, model_),
               d.embedding,
               time_t,
               d.bbox,
               time_t,
               MeanShiftModel{},
               d.confidence};
    if (frame_t != nullptr) {
      try {
        t.vt_model = init_model(*frame_t, d.bbox, config_.vt.bins_per_channel);
      } catch (const std::invalid_argument&) {
        // leave the model empty; forward propagation will coast
      }
    }
    tracklets_.push_back(std::move(t));
  }
}

void Tracker::remove_old_tracklets(double now) {
  std::erase_if(tracklets_, [&](const Tracklet& t) {
    return now - t.last_update_time > config_.t_live;
  });
}

TrackOutput Tracker::build_output(double time_t) {
  TrackOutput output;
  output.time = time_t;
  for (const Tracklet& t : tracklets_) {
    // Matched tracklets report the raw detection box; survivors report
    // the coasted filter box.
    if (t.last_update_time == time_t) {
      output.tracks.push_back({t.id, t.origin_bbox, t.last_confidence});
    } else {
      output.tracks.push_back({t.id, t.state.bbox(), t.last_confidence});
    }
  }
  std::sort(output.tracks.begin(), output.tracks.end(),
            [](const TrackRecord& a, const TrackRecord& b) {
              return a.id < b.id;
            });
  return output;
}

}  // namespace lowmot
