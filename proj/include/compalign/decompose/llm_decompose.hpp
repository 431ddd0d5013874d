#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compalign/backends/provider.hpp"
#include "compalign/decompose/decomposition.hpp"
#include "compalign/decompose/prompts.hpp"

namespace compalign {

inline constexpr int kDefaultLlmRetryBudget = 2;

struct Stage1Object {
  std::string name;
  std::optional<std::string> attribute;
};

struct NamedRelation {
  std::string subject;
  std::string predicate;
  std::string object;
};

/// Objects, attributes and relations as returned by the first prompt.
struct Stage1Record {
  std::string caption;
  std::vector<Stage1Object> objects;
  std::vector<NamedRelation> relations;

  Json to_json() const;
};

/// Parses a stage-1 reply. Tolerates code fences and prose around the JSON
/// object and ignores unknown fields. Throws MalformedReply.
Stage1Record parse_stage1_reply(std::string_view caption, std::string_view reply);

struct Stage2Reply {
  std::vector<std::string> phrases;
  std::vector<NamedRelation> relations;
};

Stage2Reply parse_stage2_reply(std::string_view reply);

Stage1Record decompose_stage1(std::string_view caption, const LlmProvider& llm,
                              const PromptTemplates& templates = default_prompt_templates(),
                              int retry_budget = kDefaultLlmRetryBudget);

CaptionDecomposition decompose_stage2(const Stage1Record& stage1, const LlmProvider& llm,
                                      const PromptTemplates& templates = default_prompt_templates(),
                                      int retry_budget = kDefaultLlmRetryBudget);

/// Joins a stage-1 record with stage-2 phrases into a decomposition. Each
/// object takes the first unused phrase containing its name, otherwise its
/// attribute and name merged. Relations whose endpoints match no entity
/// are dropped and noted in warnings.
CaptionDecomposition merge_stages(const Stage1Record& stage1, const Stage2Reply& stage2);

enum class DecomposePolicy { kRuleFirst, kLlmFirst, kRuleOnly, kLlmOnly };

std::string_view to_string(DecomposePolicy policy);
/// Throws ConfigError on an unknown name.
DecomposePolicy parse_decompose_policy(std::string_view name);

struct DecomposeOptions {
  DecomposePolicy policy = DecomposePolicy::kRuleFirst;
  PromptTemplates templates = default_prompt_templates();
  int retry_budget = kDefaultLlmRetryBudget;
};

/// Runs the permitted paths in policy order. Throws ConfigError when the
/// policy needs an LLM and none is given, DecompositionFailed when every
/// permitted path fails.
CaptionDecomposition decompose(std::string_view caption, const LlmProvider* llm,
                               const DecomposeOptions& options = {});

}  // namespace compalign
