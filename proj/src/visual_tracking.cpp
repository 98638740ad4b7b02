#include "lowmot/visual_tracking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lowmot {

namespace {

struct Workspace {
  std::vector<float> histogram;
  std::vector<int> touched;

  explicit Workspace(int total_bins) : histogram(total_bins, 0.0f) {
    touched.reserve(256);
  }

  void reset() {
    for (int b : touched) histogram[b] = 0.0f;
    touched.clear();
  }
};

inline int quantize(const std::uint8_t* rgb, int bins) {
  const int div = 256 / bins;
  const int r = rgb[0] / div;
  const int g = rgb[1] / div;
  const int b = rgb[2] / div;
  return (r * bins + g) * bins + b;
}

// Epanechnikov-weighted histogram of the ellipse inscribed in the box
// centered at (cx, cy) with half sizes (hx, hy). Returns the total kernel
// weight; zero means the window has no frame coverage.
double accumulate_histogram(const ImageFrame& frame, double cx, double cy,
                            double hx, double hy, int bins, Workspace& ws) {
  ws.reset();
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - hx)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(cx + hx)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - hy)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(cy + hy)));
  if (x0 > x1 || y0 > y1 || hx <= 0.0 || hy <= 0.0) return 0.0;

  double total = 0.0;
  for (int py = y0; py <= y1; ++py) {
    const double ny = (py + 0.5 - cy) / hy;
    const double ny2 = ny * ny;
    if (ny2 >= 1.0) continue;
    const std::uint8_t* row = frame.at(x0, py);
    for (int px = x0; px <= x1; ++px, row += 3) {
      const double nx = (px + 0.5 - cx) / hx;
      const double r2 = nx * nx + ny2;
      if (r2 >= 1.0) continue;
      const double weight = 1.0 - r2;
      const int bin = quantize(row, bins);
      if (ws.histogram[bin] == 0.0f) ws.touched.push_back(bin);
      ws.histogram[bin] += static_cast<float>(weight);
      total += weight;
    }
  }
  if (total > 0.0) {
    const float inv = static_cast<float>(1.0 / total);
    for (int b : ws.touched) ws.histogram[b] *= inv;
  }
  return total;
}

double bhattacharyya(const MeanShiftModel& model, const Workspace& ws) {
  double rho = 0.0;
  for (int b : model.active_bins) {
    const float p = ws.histogram[b];
    if (p > 0.0f) rho += std::sqrt(static_cast<double>(p) * model.histogram[b]);
  }
  return std::min(rho, 1.0);
}

// One mean-shift displacement: weighted mean of pixel positions with
// weights sqrt(q/p). The Epanechnikov profile has a constant derivative,
// so no extra kernel term appears here.
bool mean_shift_step(const ImageFrame& frame, const MeanShiftModel& model,
                     const Workspace& ws, double cx, double cy, double hx,
                     double hy, double* out_x, double* out_y) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - hx)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(cx + hx)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - hy)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(cy + hy)));

  double sum_w = 0.0, sum_x = 0.0, sum_y = 0.0;
  for (int py = y0; py <= y1; ++py) {
    const double ny = (py + 0.5 - cy) / hy;
    const double ny2 = ny * ny;
    if (ny2 >= 1.0) continue;
    const std::uint8_t* row = frame.at(x0, py);
    for (int px = x0; px <= x1; ++px, row += 3) {
      const double nx = (px + 0.5 - cx) / hx;
      if (nx * nx + ny2 >= 1.0) continue;
      const int bin = quantize(row, model.bins_per_channel);
      const float p = ws.histogram[bin];
      if (p <= 0.0f) continue;
      const float q = model.histogram[bin];
      if (q <= 0.0f) continue;
      const double w = std::sqrt(static_cast<double>(q) / p);
      sum_w += w;
      sum_x += w * (px + 0.5);
      sum_y += w * (py + 0.5);
    }
  }
  if (sum_w <= 0.0) return false;
  *out_x = sum_x / sum_w;
  *out_y = sum_y / sum_w;
  return true;
}

}  // namespace

MeanShiftModel init_model(const ImageFrame& frame, const BBox& bbox,
                          int bins_per_channel) {
  if (bins_per_channel < 2 || bins_per_channel > 256 ||
      256 % bins_per_channel != 0) {
    throw std::invalid_argument("init_model: bins must divide 256 and be >= 2");
  }
  const int total_bins =
      bins_per_channel * bins_per_channel * bins_per_channel;
  Workspace ws(total_bins);
  const auto [cx, cy] = center(bbox);
  const double covered = accumulate_histogram(
      frame, cx, cy, bbox.width / 2.0, bbox.height / 2.0, bins_per_channel, ws);
  if (covered <= 0.0) {
    throw std::invalid_argument("init_model: box has no frame coverage");
  }
  MeanShiftModel model;
  model.bins_per_channel = bins_per_channel;
  model.histogram.assign(ws.histogram.begin(), ws.histogram.end());
  model.active_bins = ws.touched;
  std::sort(model.active_bins.begin(), model.active_bins.end());
  model.ref_width = bbox.width;
  model.ref_height = bbox.height;
  return model;
}

VtResult track(const MeanShiftModel& model, const ImageFrame& frame,
               const BBox& start, const MeanShiftParams& params) {
  VtResult result{start, 0.0, false, 0};
  if (model.histogram.empty() || frame.empty()) return result;

  const int bins = model.bins_per_channel;
  Workspace ws(static_cast<int>(model.histogram.size()));

  auto [cx, cy] = center(start);
  double scale = (start.width / model.ref_width +
                  start.height / model.ref_height) / 2.0;
  scale = std::clamp(scale, 0.25, 4.0);

  bool reached_fixed_point = false;
  int iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    const double hx = scale * model.ref_width / 2.0;
    const double hy = scale * model.ref_height / 2.0;
    if (accumulate_histogram(frame, cx, cy, hx, hy, bins, ws) <= 0.0) break;

    double nx = cx, ny = cy;
    if (!mean_shift_step(frame, model, ws, cx, cy, hx, hy, &nx, &ny)) break;
    const double shift = std::hypot(nx - cx, ny - cy);
    cx = nx;
    cy = ny;

    // Scale adaptation: probe neighboring scales at the new center and
    // pull the state toward the best-scoring one.
    double best_rho = -1.0;
    double best_scale = scale;
    for (const double factor :
         {1.0 - params.scale_step, 1.0, 1.0 + params.scale_step}) {
      const double s = std::clamp(scale * factor, 0.25, 4.0);
      if (accumulate_histogram(frame, cx, cy, s * model.ref_width / 2.0,
                               s * model.ref_height / 2.0, bins, ws) <= 0.0) {
        continue;
      }
      const double rho = bhattacharyya(model, ws);
      if (rho > best_rho) {
        best_rho = rho;
        best_scale = s;
      }
    }
    scale = params.scale_smoothing * scale +
            (1.0 - params.scale_smoothing) * best_scale;

    if (shift < params.convergence_shift) {
      reached_fixed_point = true;
      ++iter;
      break;
    }
  }

  const double hx = scale * model.ref_width / 2.0;
  const double hy = scale * model.ref_height / 2.0;
  double similarity = 0.0;
  if (accumulate_histogram(frame, cx, cy, hx, hy, bins, ws) > 0.0) {
    similarity = bhattacharyya(model, ws);
  }

  result.bbox = bbox_from_center(cx, cy, 2.0 * hx, 2.0 * hy);
  result.similarity = similarity;
  result.iterations = iter;
  result.converged =
      reached_fixed_point && similarity >= params.failure_threshold;
  return result;
}

ForwardVtOutput forward_vt(const MeanShiftModel& model, const BBox& origin_bbox,
                           std::pair<double, double> kalman_velocity,
                           const ImageFrame& frame_mid,
                           const MeanShiftParams& params) {
  ForwardVtOutput out{{kalman_velocity.first, kalman_velocity.second,
                       DisplacementSource::kKalmanFallback},
                      track(model, frame_mid, origin_bbox, params)};
  if (out.vt.converged) {
    const auto [ox, oy] = center(origin_bbox);
    const auto [tx, ty] = center(out.vt.bbox);
    out.displacement = {tx - ox, ty - oy, DisplacementSource::kVisual};
  }
  return out;
}

BBox backward_vt(const BBox& detection_bbox, const ImageFrame& frame_cur,
                 const ImageFrame& frame_mid, const MeanShiftParams& params) {
  try {
    const MeanShiftModel model =
        init_model(frame_cur, detection_bbox, params.bins_per_channel);
    const VtResult result = track(model, frame_mid, detection_bbox, params);
    if (result.converged) return result.bbox;
  } catch (const std::invalid_argument&) {
    // detection without frame coverage: keep the raw box
  }
  return detection_bbox;
}

}  // namespace lowmot
