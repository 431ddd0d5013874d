#include "compalign/core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "compalign/error.hpp"

namespace compalign {

BoundingBox::BoundingBox(int x, int y, int w, int h) : x_(x), y_(y), w_(w), h_(h) {
  if (w <= 0 || h <= 0 || x < 0 || y < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid box (" + std::to_string(x) + "," + std::to_string(y) + "," +
                    std::to_string(w) + "," + std::to_string(h) + ")");
  }
}

std::optional<BoundingBox> BoundingBox::from_detector(double x, double y, double w, double h,
                                                      int image_width, int image_height) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h) ||
      w <= 0.0 || h <= 0.0) {
    return std::nullopt;
  }
  const double left = std::max(0.0, std::floor(x));
  const double top = std::max(0.0, std::floor(y));
  const double right = std::min(static_cast<double>(image_width), std::ceil(x + w));
  const double bottom = std::min(static_cast<double>(image_height), std::ceil(y + h));
  if (right <= left || bottom <= top) return std::nullopt;
  BoundingBox box;
  box.x_ = static_cast<int>(left);
  box.y_ = static_cast<int>(top);
  box.w_ = static_cast<int>(right - left);
  box.h_ = static_cast<int>(bottom - top);
  return box;
}

bool BoundingBox::contains(const BoundingBox& other) const noexcept {
  return other.x_ >= x_ && other.y_ >= y_ && other.right() <= right() &&
         other.bottom() <= bottom();
}

std::optional<BoundingBox> BoundingBox::clamped_to(int width, int height) const noexcept {
  const int r = std::min(right(), width);
  const int b = std::min(bottom(), height);
  if (r <= x_ || b <= y_) return std::nullopt;
  BoundingBox box;
  box.x_ = x_;
  box.y_ = y_;
  box.w_ = r - x_;
  box.h_ = b - y_;
  return box;
}

BoundingBox union_box(std::span<const BoundingBox> boxes) {
  if (boxes.empty()) throw Error(ErrorCode::kEmptyInput, "union_box of no boxes");
  int left = boxes.front().x();
  int top = boxes.front().y();
  int right = boxes.front().right();
  int bottom = boxes.front().bottom();
  for (const auto& b : boxes.subspan(1)) {
    left = std::min(left, b.x());
    top = std::min(top, b.y());
    right = std::max(right, b.right());
    bottom = std::max(bottom, b.bottom());
  }
  return BoundingBox(left, top, right - left, bottom - top);
}

}  // namespace compalign
