#include "lowmot/kernels.hpp"

#include <omp.h>

#include <atomic>
#include <cstdint>

namespace lowmot {

namespace {

std::atomic<int> g_thread_cap{0};

int effective_threads() {
  const int cap = g_thread_cap.load();
  const int hw = omp_get_max_threads();
  return cap > 0 ? std::min(cap, hw) : hw;
}

}  // namespace

int max_threads() { return effective_threads(); }

void set_max_threads(int n) { g_thread_cap.store(n < 0 ? 0 : n); }

SimilarityMatrix similarity_matrix(const std::vector<Embedding>& rows,
                                   const std::vector<Embedding>& cols) {
  SimilarityMatrix out(rows.size(), std::vector<double>(cols.size(), 0.0));
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out[i][j] = cosine_similarity(rows[i], cols[j]);
    }
  }
  return out;
}

SimilarityMatrix similarity_matrix_serial(const std::vector<Embedding>& rows,
                                          const std::vector<Embedding>& cols) {
  SimilarityMatrix out(rows.size(), std::vector<double>(cols.size(), 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out[i][j] = cosine_similarity(rows[i], cols[j]);
    }
  }
  return out;
}

std::vector<VtResult> track_batch(const std::vector<const MeanShiftModel*>& models,
                                  const ImageFrame& frame,
                                  const std::vector<BBox>& starts,
                                  const MeanShiftParams& params) {
  std::vector<VtResult> out(models.size(),
                            VtResult{BBox(0, 0, 1, 1), 0.0, false, 0});
  const std::int64_t n = static_cast<std::int64_t>(models.size());
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = track(*models[i], frame, starts[i], params);
  }
  return out;
}

std::vector<VtResult> track_batch_serial(
    const std::vector<const MeanShiftModel*>& models, const ImageFrame& frame,
    const std::vector<BBox>& starts, const MeanShiftParams& params) {
  std::vector<VtResult> out(models.size(),
                            VtResult{BBox(0, 0, 1, 1), 0.0, false, 0});
  for (std::size_t i = 0; i < models.size(); ++i) {
    out[i] = track(*models[i], frame, starts[i], params);
  }
  return out;
}

std::vector<BBox> backward_batch(const std::vector<BBox>& detection_boxes,
                                 const ImageFrame& frame_cur,
                                 const ImageFrame& frame_mid,
                                 const MeanShiftParams& params) {
  std::vector<BBox> out(detection_boxes.size(), BBox(0, 0, 1, 1));
  const std::int64_t n = static_cast<std::int64_t>(detection_boxes.size());
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = backward_vt(detection_boxes[i], frame_cur, frame_mid, params);
  }
  return out;
}

std::vector<BBox> backward_batch_serial(const std::vector<BBox>& detection_boxes,
                                        const ImageFrame& frame_cur,
                                        const ImageFrame& frame_mid,
                                        const MeanShiftParams& params) {
  std::vector<BBox> out(detection_boxes.size(), BBox(0, 0, 1, 1));
  for (std::size_t i = 0; i < detection_boxes.size(); ++i) {
    out[i] = backward_vt(detection_boxes[i], frame_cur, frame_mid, params);
  }
  return out;
}

}  // namespace lowmot
