#include "compalign/core/image.hpp"

#include <string>

#include "compalign/core/digest.hpp"
#include "compalign/error.hpp"
#include "compalign/kernels/kernels.hpp"

namespace compalign {

Image::Image(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), rgb_(std::move(rgb)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  if (rgb_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "pixel buffer holds " + std::to_string(rgb_.size()) + " bytes, expected " +
                    std::to_string(static_cast<std::size_t>(width) * height * 3));
  }
  id_ = sha256_hex(std::span<const std::uint8_t>(rgb_));
}

Image Image::filled(int width, int height, Rgb color) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width > 0 ? width : 0) *
                                (height > 0 ? height : 0) * 3);
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = color[0];
    rgb[i + 1] = color[1];
    rgb[i + 2] = color[2];
  }
  return Image(width, height, std::move(rgb));
}

Rgb Image::pixel(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) {
    throw Error(ErrorCode::kInvalidArgument, "pixel coordinate outside image");
  }
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {rgb_[i], rgb_[i + 1], rgb_[i + 2]};
}

Image apply_mask(const Image& image, const BoundingBox& box) {
  return apply_multi_mask(image, std::span<const BoundingBox>(&box, 1));
}

Image apply_multi_mask(const Image& image, std::span<const BoundingBox> boxes) {
  std::vector<BoundingBox> clamped;
  clamped.reserve(boxes.size());
  for (const auto& b : boxes) {
    if (auto c = b.clamped_to(image.width(), image.height())) clamped.push_back(*c);
  }
  if (clamped.empty()) {
    throw Error(ErrorCode::kBoxOutOfBounds, "no box intersects the " +
                                                std::to_string(image.width()) + "x" +
                                                std::to_string(image.height()) + " image");
  }
  return Image(image.width(), image.height(),
               kernels::omp::union_mask(image.bytes(), image.width(), image.height(), clamped));
}

}  // namespace compalign
