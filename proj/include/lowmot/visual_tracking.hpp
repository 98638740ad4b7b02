#pragma once

#include <utility>
#include <vector>

#include "lowmot/bbox.hpp"
#include "lowmot/image.hpp"

namespace lowmot {

struct MeanShiftParams {
  int bins_per_channel = 16;
  int max_iterations = 25;
  double convergence_shift = 0.2;   // pixels
  double scale_step = 0.05;         // candidate scales 1 +- step
  double scale_smoothing = 0.7;     // weight kept on the previous scale
  double failure_threshold = 0.4;   // Bhattacharyya below this is a miss
};

// Kernel-weighted color model of one target: a normalized quantized-RGB
// histogram plus the reference box size the scale factor is relative to.
struct MeanShiftModel {
  int bins_per_channel = 0;
  std::vector<float> histogram;    // size bins^3, sums to 1
  std::vector<int> active_bins;    // indices of nonzero entries
  double ref_width = 0.0;
  double ref_height = 0.0;
};

struct VtResult {
  BBox bbox;
  double similarity = 0.0;  // Bhattacharyya coefficient in [0, 1]
  bool converged = false;
  int iterations = 0;
};

enum class DisplacementSource { kVisual, kKalmanFallback };

// Planar displacement over one half-interval, fed to the filter as a
// velocity. Source records whether it was measured or coasted.
struct DisplacementObservation {
  double vx = 0.0;
  double vy = 0.0;
  DisplacementSource source = DisplacementSource::kKalmanFallback;
};

struct ForwardVtOutput {
  DisplacementObservation displacement;
  VtResult vt;
};

/// Builds the target model from the box interior, Epanechnikov-weighted
/// over the normalized box ellipse. The box is clipped to the frame;
/// a box with no frame coverage is an error.
MeanShiftModel init_model(const ImageFrame& frame, const BBox& bbox,
                          int bins_per_channel);

/// Mean-shift iterations from the start box, adapting scale each round.
/// Never throws; a lost target comes back with converged=false.
VtResult track(const MeanShiftModel& model, const ImageFrame& frame,
               const BBox& start, const MeanShiftParams& params);

/// Tracklet propagation to the intermediate frame. On tracker failure the
/// provided filter velocity becomes the displacement observation.
ForwardVtOutput forward_vt(const MeanShiftModel& model, const BBox& origin_bbox,
                           std::pair<double, double> kalman_velocity,
                           const ImageFrame& frame_mid,
                           const MeanShiftParams& params);

/// Detection propagation back to the intermediate frame. On failure the
/// raw detection box is returned unchanged.
BBox backward_vt(const BBox& detection_bbox, const ImageFrame& frame_cur,
                 const ImageFrame& frame_mid, const MeanShiftParams& params);

}  // namespace lowmot
