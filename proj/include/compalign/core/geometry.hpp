#pragma once

#include <compare>
#include <optional>
#include <span>

namespace compalign {

/// Axis-aligned pixel rectangle: left/top corner plus width/height.
/// Always non-degenerate (w > 0, h > 0) and in the non-negative quadrant.
class BoundingBox {
 public:
  BoundingBox(int x, int y, int w, int h);

  /// Rounds real detector coordinates outward and clamps them to an
  /// image frame. Returns nullopt when nothing of the box remains.
  static std::optional<BoundingBox> from_detector(double x, double y, double w, double h,
                                                  int image_width, int image_height);

  int x() const noexcept { return x_; }
  int y() const noexcept { return y_; }
  int w() const noexcept { return w_; }
  int h() const noexcept { return h_; }
  int right() const noexcept { return x_ + w_; }
  int bottom() const noexcept { return y_ + h_; }

  bool contains(const BoundingBox& other) const noexcept;
  bool contains_pixel(int px, int py) const noexcept {
    return px >= x_ && px < right() && py >= y_ && py < bottom();
  }

  /// Intersection with [0,width) x [0,height); nullopt when empty.
  std::optional<BoundingBox> clamped_to(int width, int height) const noexcept;

  auto operator<=>(const BoundingBox&) const = default;

 private:
  BoundingBox() = default;

  int x_ = 0;
  int y_ = 0;
  int w_ = 1;
  int h_ = 1;
};

/// Minimal box enclosing every input box. Throws EmptyInput on an empty span.
BoundingBox union_box(std::span<const BoundingBox> boxes);

}  // namespace compalign
