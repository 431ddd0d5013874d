#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compalign/core/json_output.hpp"

namespace compalign {

struct EntityPhrase {
  std::string object;                    // head noun, e.g. "dog"
  std::optional<std::string> attribute;  // modifier, e.g. "gray"
  std::string phrase;                    // groundable text, e.g. "gray dog"

  bool operator==(const EntityPhrase&) const = default;
};

/// Endpoints index into CaptionDecomposition::entities.
struct RelationTuple {
  std::size_t subject = 0;
  std::string predicate;
  std::size_t object = 0;

  bool operator==(const RelationTuple&) const = default;
};

enum class DecompositionSource { kRuleBased, kLlm, kLlmFallbackRuleBased };

std::string_view to_string(DecompositionSource source);

struct CaptionDecomposition {
  std::string caption;
  std::vector<EntityPhrase> entities;
  std::vector<RelationTuple> relations;
  DecompositionSource source = DecompositionSource::kRuleBased;
  std::vector<std::string> warnings;

  /// Throws InvalidArgument if any type invariant is broken.
  void validate() const;

  /// Two entities joined by one relation.
  bool is_triplet() const noexcept;

  Json to_json() const;

  bool operator==(const CaptionDecomposition&) const = default;
};

EntityPhrase make_entity(std::string object, std::optional<std::string> attribute);

}  // namespace compalign
