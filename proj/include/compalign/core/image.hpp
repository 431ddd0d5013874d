#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "compalign/core/geometry.hpp"

namespace compalign {

using Rgb = std::array<std::uint8_t, 3>;

/// Immutable RGB8 raster. The id is the lowercase hex SHA-256 of the raw
/// row-major pixel bytes, computed once at construction.
class Image {
 public:
  Image(int width, int height, std::vector<std::uint8_t> rgb);

  static Image filled(int width, int height, Rgb color);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::string& id() const noexcept { return id_; }
  std::span<const std::uint8_t> bytes() const noexcept { return rgb_; }

  Rgb pixel(int x, int y) const;

  bool operator==(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && rgb_ == other.rgb_;
  }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> rgb_;
  std::string id_;
};

/// Keeps pixels inside the (clamped) box, blacks out the rest.
/// Throws BoxOutOfBounds if the box does not intersect the frame.
Image apply_mask(const Image& image, const BoundingBox& box);

/// Keeps pixels inside the union of the boxes. Boxes falling fully outside
/// the frame are ignored; throws BoxOutOfBounds if none remain.
Image apply_multi_mask(const Image& image, std::span<const BoundingBox> boxes);

}  // namespace compalign
