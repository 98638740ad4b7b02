#include "lowmot/embedding.hpp"

#include <cmath>
#include <stdexcept>

namespace lowmot {

namespace {

double l2_norm(const std::vector<float>& v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * x;
  return std::sqrt(acc);
}

}  // namespace

Embedding Embedding::normalized(std::vector<float> values) {
  if (values.empty()) throw std::invalid_argument("Embedding: empty vector");
  const double norm = l2_norm(values);
  if (!(norm >= 0.5)) {
    throw std::invalid_argument("Embedding: norm below 0.5, unusable vector");
  }
  for (float& x : values) x = static_cast<float>(x / norm);
  Embedding e;
  e.values_ = std::move(values);
  return e;
}

Embedding::Embedding(std::vector<float> values) {
  if (values.empty()) throw std::invalid_argument("Embedding: empty vector");
  const double norm = l2_norm(values);
  if (std::abs(norm - 1.0) > 1e-6) {
    throw std::invalid_argument("Embedding: values are not unit-norm");
  }
  values_ = std::move(values);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  }
  double acc = 0.0;
  const auto& va = a.values();
  const auto& vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    acc += static_cast<double>(va[i]) * vb[i];
  }
  return acc;
}

Embedding ema_fuse(const Embedding& current, const Embedding& observation,
                   double lambda) {
  if (current.dim() != observation.dim()) {
    throw std::invalid_argument("ema_fuse: dimension mismatch");
  }
  std::vector<float> fused(current.dim());
  const auto& c = current.values();
  const auto& o = observation.values();
  for (std::size_t i = 0; i < fused.size(); ++i) {
    fused[i] = static_cast<float>(lambda * c[i] + (1.0 - lambda) * o[i]);
  }
  return Embedding::normalized(std::move(fused));
}

}  // namespace lowmot
