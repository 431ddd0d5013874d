#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "compalign/core/embedding.hpp"
#include "compalign/core/geometry.hpp"
#include "compalign/core/image.hpp"

namespace compalign {

inline constexpr double kDefaultBoxThreshold = 0.35;

struct Detection {
  BoundingBox box;
  double confidence = 0.0;
  std::string phrase;

  bool operator==(const Detection&) const = default;
};

/// Descending confidence, ties by box (x, y, w, h).
bool detection_order(const Detection& a, const Detection& b);

/// Drops detections below threshold and sorts by detection_order.
std::vector<Detection> filter_and_sort(std::vector<Detection> detections, double threshold);

// Provider interfaces. Implementations must accept concurrent calls from
// multiple threads.

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed_image(const Image& image) const = 0;
  /// text must be nonempty.
  virtual EmbeddingVector embed_text(std::string_view text) const = 0;
};

class PhraseDetector {
 public:
  virtual ~PhraseDetector() = default;
  /// Detections with confidence >= threshold, in detection_order.
  virtual std::vector<Detection> detect(const Image& image, std::string_view phrase,
                                        double threshold) const = 0;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string complete(std::string_view prompt) const = 0;
};

}  // namespace compalign
