#include "compalign/backends/provider.hpp"

#include <algorithm>
#include <tuple>

namespace compalign {

bool detection_order(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return std::tuple(a.box.x(), a.box.y(), a.box.w(), a.box.h()) <
         std::tuple(b.box.x(), b.box.y(), b.box.w(), b.box.h());
}

std::vector<Detection> filter_and_sort(std::vector<Detection> detections, double threshold) {
  std::erase_if(detections, [threshold](const Detection& d) { return d.confidence < threshold; });
  std::stable_sort(detections.begin(), detections.end(), detection_order);
  return detections;
}

}  // namespace compalign
