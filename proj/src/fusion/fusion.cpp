#include "compalign/fusion/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "compalign/error.hpp"
#include "compalign/kernels/kernels.hpp"

namespace compalign {

namespace {

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

constexpr std::array<EnumName<WeightMode>, 2> kWeightModes{{
    {WeightMode::kRawCosine, "raw_cosine"}, {WeightMode::kSoftmax, "softmax"}}};
constexpr std::array<EnumName<MissingEntityPolicy>, 2> kMissingPolicies{{
    {MissingEntityPolicy::kSkip, "skip"}, {MissingEntityPolicy::kError, "error"}}};
constexpr std::array<EnumName<RelationMask>, 2> kRelationMasks{{
    {RelationMask::kCombinedBoxes, "combined_boxes"},
    {RelationMask::kBoundingRectangle, "bounding_rectangle"}}};
constexpr std::array<EnumName<RelationText>, 2> kRelationTexts{{
    {RelationText::kPredicate, "predicate"}, {RelationText::kFullTriplet, "full_triplet"}}};

template <typename E, std::size_t N>
std::string name_of(const std::array<EnumName<E>, N>& table, E value) {
  for (const auto& e : table) {
    if (e.value == value) return std::string(e.name);
  }
  return "unknown";
}

template <typename E, std::size_t N>
E parse_enum(const std::array<EnumName<E>, N>& table, const Json& j, const char* key, E fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) throw Error(ErrorCode::kConfigError, std::string(key) + " must be a string");
  const auto s = it->get<std::string>();
  for (const auto& e : table) {
    if (e.name == s) return e.value;
  }
  throw Error(ErrorCode::kConfigError, "unknown " + std::string(key) + " '" + s + "'");
}

void require_nonzero(const EmbeddingVector& v, const char* what) {
  if (v.norm() < kZeroNormThreshold) {
    throw Error(ErrorCode::kZeroVector, std::string(what) + " has zero norm");
  }
}

}  // namespace

Json FusionConfig::to_json() const {
  Json j;
  j["normalize_embeddings"] = normalize_embeddings;
  j["missing_entity_policy"] = name_of(kMissingPolicies, missing_entity_policy);
  j["weight_mode"] = name_of(kWeightModes, weight_mode);
  j["relation_mask"] = name_of(kRelationMasks, relation_mask);
  j["relation_text"] = name_of(kRelationTexts, relation_text);
  return j;
}

FusionConfig FusionConfig::from_json(const Json& j) {
  FusionConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "fusion config must be an object");
  if (const auto it = j.find("normalize_embeddings"); it != j.end()) {
    if (!it->is_boolean()) throw Error(ErrorCode::kConfigError, "normalize_embeddings must be a bool");
    c.normalize_embeddings = it->get<bool>();
  }
  c.missing_entity_policy =
      parse_enum(kMissingPolicies, j, "missing_entity_policy", c.missing_entity_policy);
  c.weight_mode = parse_enum(kWeightModes, j, "weight_mode", c.weight_mode);
  c.relation_mask = parse_enum(kRelationMasks, j, "relation_mask", c.relation_mask);
  c.relation_text = parse_enum(kRelationTexts, j, "relation_text", c.relation_text);
  return c;
}

Similarity entity_score(const EmbeddingVector& sub, const EmbeddingVector& text) {
  return cosine_similarity(sub, text);
}

std::vector<double> fusion_weights(std::span<const FusionTerm> terms, WeightMode mode) {
  std::vector<double> weights;
  weights.reserve(terms.size());
  if (mode == WeightMode::kRawCosine) {
    for (const auto& t : terms) weights.push_back(entity_score(t.sub, t.text).value);
    return weights;
  }
  // Softmax over unnormalized dot products, shifted by the max for stability.
  for (const auto& t : terms) weights.push_back(dot(t.sub, t.text));
  if (weights.empty()) return weights;
  const double peak = *std::max_element(weights.begin(), weights.end());
  double total = 0.0;
  for (double& w : weights) {
    w = std::exp(w - peak);
    total += w;
  }
  for (double& w : weights) w /= total;
  return weights;
}

EmbeddingVector fuse_general(const EmbeddingVector& global, std::vector<FusionTerm> terms,
                             WeightMode mode) {
  require_nonzero(global, "global embedding");
  for (const auto& t : terms) {
    require_same_dim(global, t.sub);
    require_same_dim(global, t.text);
    require_nonzero(t.sub, "sub-image embedding");
    require_nonzero(t.text, "phrase embedding");
  }
  std::stable_sort(terms.begin(), terms.end(),
                   [](const FusionTerm& a, const FusionTerm& b) { return a.label < b.label; });
  const auto weights = fusion_weights(terms, mode);
  std::vector<EmbeddingVector> subs;
  subs.reserve(terms.size());
  for (auto& t : terms) subs.push_back(std::move(t.sub));
  return EmbeddingVector(kernels::omp::weighted_sum(global, weights, subs));
}

EmbeddingVector fuse_triplet(const EmbeddingVector& global, const EmbeddingVector& e_subj,
                             const EmbeddingVector& e_obj, const EmbeddingVector& e_rel,
                             const EmbeddingVector& t_subj, const EmbeddingVector& t_obj,
                             const EmbeddingVector& t_rel, WeightMode mode) {
  std::vector<FusionTerm> terms;
  terms.push_back(FusionTerm{"", e_obj, t_obj});
  terms.push_back(FusionTerm{"", e_subj, t_subj});
  terms.push_back(FusionTerm{"", e_rel, t_rel});
  return fuse_general(global, std::move(terms), mode);
}

Image relation_image(const Image& image, const BoundingBox& subj_box, const BoundingBox& obj_box,
                     RelationMask mode) {
  const std::array<BoundingBox, 2> boxes{subj_box, obj_box};
  if (mode == RelationMask::kBoundingRectangle) return apply_mask(image, union_box(boxes));
  return apply_multi_mask(image, boxes);
}

EmbeddingVector relation_embedding(const Image& image, const BoundingBox& subj_box,
                                   const BoundingBox& obj_box, const Embedder& embedder,
                                   RelationMask mode) {
  return embedder.embed_image(relation_image(image, subj_box, obj_box, mode));
}

}  // namespace compalign
