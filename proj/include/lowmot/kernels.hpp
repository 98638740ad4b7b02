#pragma once

#include <vector>

#include "lowmot/association.hpp"
#include "lowmot/embedding.hpp"
#include "lowmot/visual_tracking.hpp"

namespace lowmot {

// Hot per-step loops, parallelized with OpenMP. Every kernel writes
// disjoint per-item outputs, so results are identical for any thread
// count; the *_serial twins are the reference implementations the tests
// and the benchmark compare against.

int max_threads();
void set_max_threads(int n);  // 0 restores the OpenMP default

/// Cosine similarity of every (row, col) embedding pair.
SimilarityMatrix similarity_matrix(const std::vector<Embedding>& rows,
                                   const std::vector<Embedding>& cols);
SimilarityMatrix similarity_matrix_serial(const std::vector<Embedding>& rows,
                                          const std::vector<Embedding>& cols);

/// Runs one tracker per model over a shared frame (forward propagation).
std::vector<VtResult> track_batch(const std::vector<const MeanShiftModel*>& models,
                                  const ImageFrame& frame,
                                  const std::vector<BBox>& starts,
                                  const MeanShiftParams& params);
std::vector<VtResult> track_batch_serial(
    const std::vector<const MeanShiftModel*>& models, const ImageFrame& frame,
    const std::vector<BBox>& starts, const MeanShiftParams& params);

/// Backward propagation: per box, build a model on the current frame and
/// track it in the intermediate frame. Boxes without frame coverage fall
/// back to themselves.
std::vector<BBox> backward_batch(const std::vector<BBox>& detection_boxes,
                                 const ImageFrame& frame_cur,
                                 const ImageFrame& frame_mid,
                                 const MeanShiftParams& params);
std::vector<BBox> backward_batch_serial(const std::vector<BBox>& detection_boxes,
                                        const ImageFrame& frame_cur,
                                        const ImageFrame& frame_mid,
                                        const MeanShiftParams& params);

}  // namespace lowmot
