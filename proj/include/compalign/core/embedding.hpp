#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace compalign {

/// Norms below this are treated as corrupt embeddings.
inline constexpr double kZeroNormThreshold = 1e-12;

/// Fixed-dimension real vector. Construction rejects empty or non-finite
/// input, so every live instance has dim >= 1 and finite components.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> values);
  EmbeddingVector(std::initializer_list<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

struct Similarity {
  double value = 0.0;

  auto operator<=>(const Similarity&) const = default;
};

/// Throws DimensionMismatch when the dims differ.
void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b);

double dot(const EmbeddingVector& a, const EmbeddingVector& b);

/// a.b / (|a||b|). Throws DimensionMismatch or ZeroVector.
Similarity cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// v / |v|. Throws ZeroVector when |v| < kZeroNormThreshold.
EmbeddingVector l2_normalize(const EmbeddingVector& v);

EmbeddingVector scaled(const EmbeddingVector& v, double factor);

}  // namespace compalign
