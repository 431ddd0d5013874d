#include "compalign/fusion/pair_scorer.hpp"

#include <map>
#include <string>

#include "compalign/error.hpp"

namespace compalign {

namespace {

EmbeddingVector prepare(EmbeddingVector v, const FusionConfig& config) {
  return config.normalize_embeddings ? l2_normalize(v) : v;
}

Json box_json(const BoundingBox& b) {
  return Json{{"x", b.x()}, {"y", b.y()}, {"w", b.w()}, {"h", b.h()}};
}

void require_providers(const Providers& p) {
  if (p.embedder == nullptr || p.detector == nullptr) {
    throw Error(ErrorCode::kConfigError, "score_pair needs an embedder and a detector");
  }
}

}  // namespace

Json PairScore::to_json(const FusionConfig& config) const {
  Json j;
  j["caption"] = caption;
  j["image_id"] = image_id;
  j["base_similarity"] = base_similarity.value;
  j["fused_similarity"] = fused_similarity.value;
  Json ents = Json::array();
  for (const auto& e : entities) {
    Json je;
    je["phrase"] = e.phrase;
    je["box"] = box_json(e.box);
    je["confidence"] = e.confidence;
    je["score"] = e.score.value;
    ents.push_back(std::move(je));
  }
  j["entities"] = std::move(ents);
  j["relation_score"] = relation_score ? Json(relation_score->value) : Json(nullptr);
  j["config"] = config.to_json();
  return j;
}

PairScore score_pair(const Image& image, const CaptionDecomposition& decomposition,
                     const Providers& providers, const ScoringOptions& options) {
  require_providers(providers);
  decomposition.validate();
  const auto& config = options.fusion;
  const Embedder& embedder = *providers.embedder;

  PairScore result;
  result.caption = decomposition.caption;
  result.image_id = image.id();

  const auto global = prepare(embedder.embed_image(image), config);
  const auto caption_embedding = prepare(embedder.embed_text(decomposition.caption), config);
  result.base_similarity = cosine_similarity(global, caption_embedding);

  std::vector<FusionTerm> terms;
  // entity index -> grounded box, for relation sub-images
  std::map<std::size_t, BoundingBox> boxes;
  for (std::size_t i = 0; i < decomposition.entities.size(); ++i) {
    const auto& phrase = decomposition.entities[i].phrase;
    const auto detections = providers.detector->detect(image, phrase, options.box_threshold);
    if (detections.empty()) {
      if (config.missing_entity_policy == MissingEntityPolicy::kError) {
        throw Error(ErrorCode::kGroundingEmpty,
                    "no detection for '" + phrase + "' in image " + image.id());
      }
      continue;
    }
    const Detection& top = detections.front();
    auto sub = prepare(embedder.embed_image(apply_mask(image, top.box)), config);
    auto text = prepare(embedder.embed_text(phrase), config);
    const auto score = entity_score(sub, text);
    boxes.emplace(i, top.box);
    terms.push_back(FusionTerm{phrase, sub, text});
    result.entities.push_back(
        GroundedEntity{phrase, top.box, top.confidence, std::move(sub), std::move(text), score});
  }

  if (decomposition.is_triplet()) {
    const auto& rel = decomposition.relations.front();
    const auto s = boxes.find(rel.subject);
    const auto o = boxes.find(rel.object);
    if (s != boxes.end() && o != boxes.end()) {
      const std::string rel_text =
          config.relation_text == RelationText::kPredicate
              ? rel.predicate
              : decomposition.entities[rel.subject].phrase + " " + rel.predicate + " " +
                    decomposition.entities[rel.object].phrase;
      auto sub = prepare(
          relation_embedding(image, s->second, o->second, embedder, config.relation_mask), config);
      auto text = prepare(embedder.embed_text(rel_text), config);
      result.relation_score = entity_score(sub, text);
      terms.push_back(FusionTerm{rel_text, std::move(sub), std::move(text)});
    }
  }

  const auto fused = fuse_general(global, std::move(terms), config.weight_mode);
  result.fused_similarity = cosine_similarity(fused, caption_embedding);
  return result;
}

PairScore score_pair(const Image& image, std::string_view caption, const Providers& providers,
                     const ScoringOptions& options) {
  require_providers(providers);
  const auto decomposition = decompose(caption, providers.llm, options.decompose);
  return score_pair(image, decomposition, providers, options);
}

}  // namespace compalign
