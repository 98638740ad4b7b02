#pragma once

#include <cstdint>
#include <vector>

#include "lowmot/association.hpp"
#include "lowmot/bbd.hpp"
#include "lowmot/detection.hpp"
#include "lowmot/image.hpp"
#include "lowmot/kalman.hpp"
#include "lowmot/visual_tracking.hpp"

namespace lowmot {

enum class TrackingMode { kLowFrequency, kFullFrequency };

struct PipelineConfig {
  double delta_t = 1.0;  // nominal seconds between detection frames
  TrackingMode mode = TrackingMode::kLowFrequency;
  double t_live = 2.0;          // coasting tracklets die after this
  double ema_lambda = 0.9;      // weight kept on the running appearance
  double init_confidence = 0.6; // births need at least this confidence
  AssociationConfig association;
  BbdParams bbd;
  MeanShiftParams vt;
};

struct Tracklet {
  std::int64_t id;
  KalmanState state;
  Embedding ema_embedding;
  double last_update_time;
  BBox origin_bbox;  // latest matched detection box
  double created_time;
  MeanShiftModel vt_model;  // unused in full-frequency mode
  double last_confidence;
};

struct TrackRecord {
  std::int64_t id;
  BBox bbox;
  double confidence;
};

struct TrackOutput {
  double time = 0.0;
  std::vector<TrackRecord> tracks;
};

// Per-step instrumentation; predicts/updates count per-tracklet filter
// calls, vt_calls counts single-object tracker invocations.
struct StepCounters {
  long kf_predicts = 0;
  long kf_updates = 0;
  long vt_calls = 0;
};

struct StageTimings {
  double vt_ms = 0.0;
  double association_ms = 0.0;
  double kalman_ms = 0.0;
  double io_ms = 0.0;
  long steps = 0;

  double total_ms() const { return vt_ms + association_ms + kalman_ms + io_ms; }
};

// Single-writer per sequence: step calls are strictly ordered in time.
// Batch visual tracking inside one step fans out across threads.
class Tracker {
 public:
  explicit Tracker(PipelineConfig config);

  /// Low-frequency step: detections at time_t, intermediate frame at
  /// time_mid. Runs backward/forward propagation, two predicts and up to
  /// two updates per tracklet.
  TrackOutput step(const ImageFrame& frame_t, const ImageFrame& frame_mid,
                   double time_t, double time_mid,
                   const std::vector<Detection>& detections);

  /// Low-frequency bootstrap for the first detection frame, where no
  /// intermediate frame exists yet: association happens at the current
  /// frame without visual tracking, and new tracklets take their
  /// appearance models from frame_t.
  TrackOutput step(const ImageFrame& frame_t, double time_t,
                   const std::vector<Detection>& detections);

  /// Full-frequency step: one predict, one associate, one update. No
  /// visual tracking involved.
  TrackOutput step(double time_t, const std::vector<Detection>& detections);

  const PipelineConfig& config() const { return config_; }
  const std::vector<Tracklet>& tracklets() const { return tracklets_; }
  const StepCounters& last_step_counters() const { return counters_; }
  const StageTimings& timings() const { return timings_; }
  double last_step_ms() const { return last_step_ms_; }

 private:
  TrackOutput step_at_current_frame(double time_t,
                                    const std::vector<Detection>& detections,
                                    const ImageFrame* frame_for_models);
  void validate_step_time(double time_t,
                          const std::vector<Detection>& detections) const;
  void update_matched(Tracklet& tracklet, const Detection& detection,
                      const BBox& backward_box,
                      const DisplacementObservation& displacement,
                      const ImageFrame* frame_t, double time_t);
  void create_new_tracklets(const std::vector<Detection>& detections,
                            const std::vector<std::size_t>& unmatched,
                            const ImageFrame* frame_t, double time_t);
  void remove_old_tracklets(double now);
  TrackOutput build_output(double time_t);

  PipelineConfig config_;
  KalmanModel model_;
  std::vector<Tracklet> tracklets_;
  std::int64_t next_id_ = 1;
  double last_time_ = -1.0;
  bool has_stepped_ = false;
  StepCounters counters_;
  StageTimings timings_;
  double last_step_ms_ = 0.0;
};

}  // namespace lowmot
