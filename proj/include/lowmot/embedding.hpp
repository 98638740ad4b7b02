#pragma once

#include <cstddef>
#include <vector>

namespace lowmot {

/// Unit-norm appearance feature vector. The dimension is a run-level
/// constant; mixing dimensions within one run signals corrupt input.
class Embedding {
 public:
  // Normalizes the given values; throws if the norm is below 0.5 (a vector
  // that short cannot be meaningfully rescaled to the unit sphere).
  static Embedding normalized(std::vector<float> values);

  // Accepts values that are already unit-norm within 1e-6.
  explicit Embedding(std::vector<float> values);

  std::size_t dim() const { return values_.size(); }
  const std::vector<float>& values() const { return values_; }

 private:
  Embedding() = default;
  std::vector<float> values_;
};

double cosine_similarity(const Embedding& a, const Embedding& b);

// EMA fusion of a tracklet feature with a fresh observation, renormalized.
Embedding ema_fuse(const Embedding& current, const Embedding& observation,
                   double lambda);

}  // namespace lowmot
