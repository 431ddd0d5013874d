#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compalign/backends/provider.hpp"
#include "compalign/core/embedding.hpp"
#include "compalign/core/geometry.hpp"
#include "compalign/core/image.hpp"
#include "compalign/core/json_output.hpp"

namespace compalign {

/// raw_cosine weights each sub-image by its cosine with its phrase;
/// softmax replaces those weights with a softmax over raw dot products.
enum class WeightMode { kRawCosine, kSoftmax };
enum class MissingEntityPolicy { kSkip, kError };
/// Relation sub-image: the subject and object boxes kept together, or the
/// filled rectangle spanning their extreme coordinates.
enum class RelationMask { kCombinedBoxes, kBoundingRectangle };
/// Text scored against the relation sub-image.
enum class RelationText { kPredicate, kFullTriplet };

struct FusionConfig {
  bool normalize_embeddings = true;
  MissingEntityPolicy missing_entity_policy = MissingEntityPolicy::kSkip;
  WeightMode weight_mode = WeightMode::kRawCosine;
  RelationMask relation_mask = RelationMask::kCombinedBoxes;
  RelationText relation_text = RelationText::kPredicate;

  Json to_json() const;
  /// Missing keys keep defaults; unknown enum names throw ConfigError.
  static FusionConfig from_json(const Json& j);

  bool operator==(const FusionConfig&) const = default;
};

/// One sub-image embedding with the text it is weighted against.
struct FusionTerm {
  std::string label;
  EmbeddingVector sub;
  EmbeddingVector text;
};

/// cos(sub, text).
Similarity entity_score(const EmbeddingVector& sub, const EmbeddingVector& text);

/// Weights for terms in the order given.
std::vector<double> fusion_weights(std::span<const FusionTerm> terms, WeightMode mode);

/// global + sum_k w_k * sub_k. Terms are stable-sorted by label before
/// summation so the result does not depend on input order. No
/// renormalization of the sum. Throws DimensionMismatch or ZeroVector.
EmbeddingVector fuse_general(const EmbeddingVector& global, std::vector<FusionTerm> terms,
                             WeightMode mode = WeightMode::kRawCosine);

/// global + s_obj*e_obj + s_subj*e_subj + s_rel*e_rel.
EmbeddingVector fuse_triplet(const EmbeddingVector& global, const EmbeddingVector& e_subj,
                             const EmbeddingVector& e_obj, const EmbeddingVector& e_rel,
                             const EmbeddingVector& t_subj, const EmbeddingVector& t_obj,
                             const EmbeddingVector& t_rel,
                             WeightMode mode = WeightMode::kRawCosine);

/// The masked image whose embedding represents a subject-object relation.
Image relation_image(const Image& image, const BoundingBox& subj_box, const BoundingBox& obj_box,
                     RelationMask mode = RelationMask::kCombinedBoxes);

EmbeddingVector relation_embedding(const Image& image, const BoundingBox& subj_box,
                                   const BoundingBox& obj_box, const Embedder& embedder,
                                   RelationMask mode = RelationMask::kCombinedBoxes);

}  // namespace compalign
