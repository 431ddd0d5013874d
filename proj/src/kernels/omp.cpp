#include <omp.h>

#include <cmath>

#include "compalign/kernels/kernels.hpp"

namespace compalign::kernels::omp {

namespace {

// Below these sizes a parallel region costs more than it saves.
constexpr std::size_t kMinRowsForParallel = 64;
constexpr long kMinPixelsForParallel = 1 << 14;
constexpr std::size_t kMinWorkForParallel = 1 << 15;

}  // namespace

std::vector<double> batch_cosine(std::span<const EmbeddingVector> rows,
                                 const EmbeddingVector& query) {
  const double query_norm = query.norm();
  const auto count = static_cast<long>(rows.size());
  const std::size_t dim = query.dim();
  std::vector<double> out(rows.size());
#pragma omp parallel for schedule(static) if (rows.size() >= kMinRowsForParallel)
  for (long r = 0; r < count; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    double d = 0.0;
    double n = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      d += row[i] * query[i];
      n += row[i] * row[i];
    }
    out[static_cast<std::size_t>(r)] = d / (std::sqrt(n) * query_norm);
  }
  return out;
}

std::vector<std::uint8_t> union_mask(std::span<const std::uint8_t> rgb, int width, int height,
                                     std::span<const BoundingBox> boxes) {
  std::vector<std::uint8_t> out(rgb.size(), 0);
  const long pixels = static_cast<long>(width) * height;
#pragma omp parallel for schedule(static) if (pixels >= kMinPixelsForParallel)
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width * 3;
    // Copy each box's horizontal span on this row; overlapping spans copy
    // the same source bytes, so the result is order-independent.
    for (const auto& b : boxes) {
      if (y < b.y() || y >= b.bottom()) continue;
      const std::size_t begin = row + static_cast<std::size_t>(b.x()) * 3;
      const std::size_t end = row + static_cast<std::size_t>(b.right()) * 3;
      for (std::size_t i = begin; i < end; ++i) out[i] = rgb[i];
    }
  }
  return out;
}

std::vector<double> weighted_sum(const EmbeddingVector& base, std::span<const double> weights,
                                 std::span<const EmbeddingVector> terms) {
  std::vector<double> out(base.values().begin(), base.values().end());
  const auto dim = static_cast<long>(out.size());
  const std::size_t k_count = terms.size();
#pragma omp parallel for schedule(static) if (out.size() * k_count >= kMinWorkForParallel)
  for (long i = 0; i < dim; ++i) {
    double acc = out[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < k_count; ++k) {
      if (weights[k] == 0.0) continue;
      acc += weights[k] * terms[k][static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace compalign::kernels::omp
