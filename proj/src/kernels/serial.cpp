#include <cmath>

#include "compalign/kernels/kernels.hpp"

namespace compalign::kernels::serial {

std::vector<double> batch_cosine(std::span<const EmbeddingVector> rows,
                                 const EmbeddingVector& query) {
  const double query_norm = query.norm();
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double d = 0.0;
    double n = 0.0;
    for (std::size_t i = 0; i < query.dim(); ++i) {
      d += rows[r][i] * query[i];
      n += rows[r][i] * rows[r][i];
    }
    out[r] = d / (std::sqrt(n) * query_norm);
  }
  return out;
}

std::vector<std::uint8_t> union_mask(std::span<const std::uint8_t> rgb, int width, int height,
                                     std::span<const BoundingBox> boxes) {
  std::vector<std::uint8_t> out(rgb.size(), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool keep = false;
      for (const auto& b : boxes) {
        if (b.contains_pixel(x, y)) {
          keep = true;
          break;
        }
      }
      if (keep) {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        out[i] = rgb[i];
        out[i + 1] = rgb[i + 1];
        out[i + 2] = rgb[i + 2];
      }
    }
  }
  return out;
}

std::vector<double> weighted_sum(const EmbeddingVector& base, std::span<const double> weights,
                                 std::span<const EmbeddingVector> terms) {
  std::vector<double> out(base.values().begin(), base.values().end());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (weights[k] == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * terms[k][i];
  }
  return out;
}

}  // namespace compalign::kernels::serial
