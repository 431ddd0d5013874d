#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "compalign/core/embedding.hpp"
#include "compalign/core/geometry.hpp"

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP variant; the OpenMP variants only split work across independent
// outputs, so both produce bit-identical results.
namespace compalign::kernels {

namespace serial {

/// out[i] = cosine(rows[i], query) with no validation; rows must match query dim.
std::vector<double> batch_cosine(std::span<const EmbeddingVector> rows,
                                 const EmbeddingVector& query);

/// Black-fills every pixel outside the union of the boxes (already clamped).
std::vector<std::uint8_t> union_mask(std::span<const std::uint8_t> rgb, int width, int height,
                                     std::span<const BoundingBox> boxes);

/// out = base + sum_k weights[k] * terms[k], accumulated per component in
/// term order. Zero weights are skipped so all-zero weights copy base.
std::vector<double> weighted_sum(const EmbeddingVector& base, std::span<const double> weights,
                                 std::span<const EmbeddingVector> terms);

}  // namespace serial

namespace omp {

std::vector<double> batch_cosine(std::span<const EmbeddingVector> rows,
                                 const EmbeddingVector& query);
std::vector<std::uint8_t> union_mask(std::span<const std::uint8_t> rgb, int width, int height,
                                     std::span<const BoundingBox> boxes);
std::vector<double> weighted_sum(const EmbeddingVector& base, std::span<const double> weights,
                                 std::span<const EmbeddingVector> terms);

}  // namespace omp

}  // namespace compalign::kernels
