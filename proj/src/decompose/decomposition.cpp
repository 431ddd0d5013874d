#include "compalign/decompose/decomposition.hpp"

#include <string>

#include "compalign/error.hpp"

namespace compalign {

std::string_view to_string(DecompositionSource source) {
  switch (source) {
    case DecompositionSource::kRuleBased: return "rule_based";
    case DecompositionSource::kLlm: return "llm";
    case DecompositionSource::kLlmFallbackRuleBased: return "llm_fallback_rule_based";
  }
  return "unknown";
}

EntityPhrase make_entity(std::string object, std::optional<std::string> attribute) {
  if (attribute && attribute->empty()) attribute.reset();
  EntityPhrase e;
  e.phrase = attribute ? *attribute + " " + object : object;
  e.object = std::move(object);
  e.attribute = std::move(attribute);
  return e;
}

void CaptionDecomposition::validate() const {
  if (entities.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "decomposition has no entities");
  }
  for (const auto& e : entities) {
    if (e.phrase.empty() || e.object.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "entity with empty phrase or object");
    }
    if (e.phrase.find(e.object) == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "phrase '" + e.phrase + "' does not contain object '" + e.object + "'");
    }
  }
  for (const auto& r : relations) {
    if (r.predicate.empty()) throw Error(ErrorCode::kInvalidArgument, "empty predicate");
    if (r.subject >= entities.size() || r.object >= entities.size()) {
      throw Error(ErrorCode::kInvalidArgument, "relation endpoint out of range");
    }
  }
}

bool CaptionDecomposition::is_triplet() const noexcept {
  return entities.size() == 2 && relations.size() == 1 &&
         relations[0].subject != relations[0].object;
}

Json CaptionDecomposition::to_json() const {
  Json j;
  j["caption"] = caption;
  j["source"] = std::string(to_string(source));
  Json ents = Json::array();
  for (const auto& e : entities) {
    Json je;
    je["object"] = e.object;
    je["attribute"] = e.attribute ? Json(*e.attribute) : Json(nullptr);
    je["phrase"] = e.phrase;
    ents.push_back(std::move(je));
  }
  j["entities"] = std::move(ents);
  Json rels = Json::array();
  for (const auto& r : relations) {
    Json jr;
    jr["subject"] = entities[r.subject].phrase;
    jr["predicate"] = r.predicate;
    jr["object"] = entities[r.object].phrase;
    jr["subject_index"] = r.subject;
    jr["object_index"] = r.object;
    rels.push_back(std::move(jr));
  }
  j["relations"] = std::move(rels);
  j["warnings"] = warnings;
  return j;
}

}  // namespace compalign
