#include "compalign/core/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "compalign/error.hpp"

namespace compalign {

namespace {

void validate(const std::vector<double>& values) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding must have dim >= 1");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "embedding component " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  validate(values_);
}

EmbeddingVector::EmbeddingVector(std::initializer_list<double> values) : values_(values) {
  validate(values_);
}

double EmbeddingVector::norm() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dim " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) sum += a[i] * b[i];
  return sum;
}

Similarity cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kZeroNormThreshold || nb < kZeroNormThreshold) {
    throw Error(ErrorCode::kZeroVector, "cosine similarity of a zero-norm vector");
  }
  // na * nb is commutative, so the result is exactly symmetric.
  return Similarity{std::clamp(dot(a, b) / (na * nb), -1.0, 1.0)};
}

EmbeddingVector l2_normalize(const EmbeddingVector& v) {
  const double n = v.norm();
  if (n < kZeroNormThreshold) {
    throw Error(ErrorCode::kZeroVector, "cannot normalize a zero-norm vector");
  }
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x /= n;
  return EmbeddingVector(std::move(out));
}

EmbeddingVector scaled(const EmbeddingVector& v, double factor) {
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x *= factor;
  return EmbeddingVector(std::move(out));
}

}  // namespace compalign
