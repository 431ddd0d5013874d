#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compalign/backends/provider.hpp"
#include "compalign/decompose/llm_decompose.hpp"
#include "compalign/fusion/fusion.hpp"

namespace compalign {

/// Non-owning handles. llm may be null when the policy never needs it.
struct Providers {
  const Embedder* embedder = nullptr;
  const PhraseDetector* detector = nullptr;
  const LlmProvider* llm = nullptr;
};

struct ScoringOptions {
  FusionConfig fusion;
  DecomposeOptions decompose;
  double box_threshold = kDefaultBoxThreshold;
};

struct GroundedEntity {
  std::string phrase;
  BoundingBox box;
  double confidence = 0.0;
  EmbeddingVector sub_embedding;
  EmbeddingVector text_embedding;
  Similarity score;
};

struct PairScore {
  std::string caption;
  std::string image_id;
  Similarity base_similarity;
  Similarity fused_similarity;
  std::vector<GroundedEntity> entities;
  std::optional<Similarity> relation_score;

  /// Field order: caption, image_id, base_similarity, fused_similarity,
  /// entities, relation_score, config.
  Json to_json(const FusionConfig& config) const;
};

/// Grounds every entity phrase (top-1 detection), embeds the masked
/// sub-images, adds the relation term for triplet captions, fuses into the
/// adjusted image embedding and scores it against the full caption.
PairScore score_pair(const Image& image, const CaptionDecomposition& decomposition,
                     const Providers& providers, const ScoringOptions& options);

/// Decomposes the caption first under options.decompose.
PairScore score_pair(const Image& image, std::string_view caption, const Providers& providers,
                     const ScoringOptions& options);

}  // namespace compalign
