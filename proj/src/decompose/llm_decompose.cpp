#include "compalign/decompose/llm_decompose.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "compalign/decompose/svo_parser.hpp"
#include "compalign/error.hpp"

namespace compalign {

namespace {

std::string trim(std::string_view s) {
  auto begin = s.begin();
  auto end = s.end();
  while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
  return std::string(begin, end);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::kMalformedReply, why);
}

// The outermost {...} span of the reply; models like to wrap JSON in fences.
Json extract_object(std::string_view reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    malformed("reply contains no JSON object");
  }
  Json j = Json::parse(reply.substr(open, close - open + 1), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) malformed("reply is not valid JSON");
  return j;
}

std::string required_string(const Json& obj, const char* key, const char* where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    malformed(std::string(where) + " needs string field '" + key + "'");
  }
  auto value = trim(it->get<std::string>());
  if (value.empty()) malformed(std::string(where) + " has empty '" + key + "'");
  return value;
}

std::vector<NamedRelation> parse_relations(const Json& root) {
  std::vector<NamedRelation> out;
  const auto it = root.find("relations");
  if (it == root.end() || it->is_null()) return out;
  if (!it->is_array()) malformed("'relations' is not an array");
  for (const auto& r : *it) {
    if (!r.is_object()) malformed("relation entry is not an object");
    out.push_back(NamedRelation{required_string(r, "subject", "relation"),
                                required_string(r, "predicate", "relation"),
                                required_string(r, "object", "relation")});
  }
  return out;
}

std::optional<std::size_t> resolve_endpoint(const std::vector<EntityPhrase>& entities,
                                            std::string_view name) {
  const auto key = lower(trim(name));
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (lower(entities[i].object) == key || lower(entities[i].phrase) == key) return i;
  }
  return std::nullopt;
}

CaptionDecomposition run_llm_path(std::string_view caption, const LlmProvider& llm,
                                  const DecomposeOptions& options) {
  const auto stage1 = decompose_stage1(caption, llm, options.templates, options.retry_budget);
  return decompose_stage2(stage1, llm, options.templates, options.retry_budget);
}

}  // namespace

Json Stage1Record::to_json() const {
  Json j;
  Json objs = Json::array();
  for (const auto& o : objects) {
    Json jo;
    jo["name"] = o.name;
    jo["attribute"] = o.attribute ? Json(*o.attribute) : Json(nullptr);
    objs.push_back(std::move(jo));
  }
  j["objects"] = std::move(objs);
  Json rels = Json::array();
  for (const auto& r : relations) {
    rels.push_back(Json{{"subject", r.subject}, {"predicate", r.predicate}, {"object", r.object}});
  }
  j["relations"] = std::move(rels);
  return j;
}

Stage1Record parse_stage1_reply(std::string_view caption, std::string_view reply) {
  const Json root = extract_object(reply);
  const auto objs = root.find("objects");
  if (objs == root.end() || !objs->is_array()) malformed("stage-1 reply lacks 'objects' array");
  Stage1Record record;
  record.caption = std::string(caption);
  for (const auto& o : *objs) {
    if (!o.is_object()) malformed("object entry is not an object");
    Stage1Object obj;
    obj.name = required_string(o, "name", "object");
    if (const auto a = o.find("attribute"); a != o.end() && !a->is_null()) {
      if (!a->is_string()) malformed("object 'attribute' must be a string or null");
      if (auto value = trim(a->get<std::string>()); !value.empty()) obj.attribute = value;
    }
    record.objects.push_back(std::move(obj));
  }
  record.relations = parse_relations(root);
  return record;
}

Stage2Reply parse_stage2_reply(std::string_view reply) {
  const Json root = extract_object(reply);
  const auto phrases = root.find("phrases");
  if (phrases == root.end() || !phrases->is_array()) malformed("stage-2 reply lacks 'phrases' array");
  Stage2Reply out;
  for (const auto& p : *phrases) {
    if (!p.is_string()) malformed("phrase entry is not a string");
    if (auto value = trim(p.get<std::string>()); !value.empty()) out.phrases.push_back(value);
  }
  out.relations = parse_relations(root);
  return out;
}

Stage1Record decompose_stage1(std::string_view caption, const LlmProvider& llm,
                              const PromptTemplates& templates, int retry_budget) {
  if (trim(caption).empty()) throw Error(ErrorCode::kInvalidArgument, "empty caption");
  const auto prompt = render_prompt(templates.stage1, caption);
  std::string last_error;
  for (int attempt = 0; attempt <= retry_budget; ++attempt) {
    const auto reply = llm.complete(prompt);
    try {
      return parse_stage1_reply(caption, reply);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedReply) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::kMalformedReply, "stage 1 failed after " +
                                              std::to_string(retry_budget + 1) +
                                              " attempts; last: " + last_error);
}

CaptionDecomposition merge_stages(const Stage1Record& stage1, const Stage2Reply& stage2) {
  CaptionDecomposition d;
  d.caption = stage1.caption;
  d.source = DecompositionSource::kLlm;
  std::vector<bool> used(stage2.phrases.size(), false);
  for (const auto& obj : stage1.objects) {
    EntityPhrase e = make_entity(obj.name, obj.attribute);
    for (std::size_t i = 0; i < stage2.phrases.size(); ++i) {
      if (!used[i] && stage2.phrases[i].find(obj.name) != std::string::npos) {
        used[i] = true;
        e.phrase = stage2.phrases[i];
        break;
      }
    }
    d.entities.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) d.warnings.push_back("phrase '" + stage2.phrases[i] + "' matches no object");
  }
  const auto& relations = stage2.relations.empty() ? stage1.relations : stage2.relations;
  for (const auto& r : relations) {
    const auto s = resolve_endpoint(d.entities, r.subject);
    const auto o = resolve_endpoint(d.entities, r.object);
    if (!s || !o) {
      d.warnings.push_back("dropped relation (" + r.subject + ", " + r.predicate + ", " +
                           r.object + "): endpoint matches no entity");
      continue;
    }
    d.relations.push_back(RelationTuple{*s, r.predicate, *o});
  }
  return d;
}

CaptionDecomposition decompose_stage2(const Stage1Record& stage1, const LlmProvider& llm,
                                      const PromptTemplates& templates, int retry_budget) {
  if (stage1.objects.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "stage-1 record has no objects");
  }
  const auto prompt = render_prompt(templates.stage2, stage1.caption, stage1.to_json().dump());
  std::string last_error;
  for (int attempt = 0; attempt <= retry_budget; ++attempt) {
    const auto reply = llm.complete(prompt);
    try {
      auto d = merge_stages(stage1, parse_stage2_reply(reply));
      d.validate();
      return d;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedReply) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::kMalformedReply, "stage 2 failed after " +
                                              std::to_string(retry_budget + 1) +
                                              " attempts; last: " + last_error);
}

std::string_view to_string(DecomposePolicy policy) {
  switch (policy) {
    case DecomposePolicy::kRuleFirst: return "rule_first";
    case DecomposePolicy::kLlmFirst: return "llm_first";
    case DecomposePolicy::kRuleOnly: return "rule_only";
    case DecomposePolicy::kLlmOnly: return "llm_only";
  }
  return "unknown";
}

DecomposePolicy parse_decompose_policy(std::string_view name) {
  for (auto p : {DecomposePolicy::kRuleFirst, DecomposePolicy::kLlmFirst,
                 DecomposePolicy::kRuleOnly, DecomposePolicy::kLlmOnly}) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorCode::kConfigError, "unknown decomposition policy '" + std::string(name) + "'");
}

CaptionDecomposition decompose(std::string_view caption, const LlmProvider* llm,
                               const DecomposeOptions& options) {
  if (trim(caption).empty()) throw Error(ErrorCode::kInvalidArgument, "empty caption");
  const auto policy = options.policy;
  if (policy == DecomposePolicy::kLlmOnly && llm == nullptr) {
    throw Error(ErrorCode::kConfigError, "policy llm_only requires an LLM backend");
  }

  std::string failures;
  auto note = [&failures](const Error& e) {
    if (!failures.empty()) failures += "; ";
    failures += e.what();
  };
  auto try_rule = [&]() -> std::optional<CaptionDecomposition> {
    try {
      return parse_svo(caption);
    } catch (const Error& e) {
      note(e);
      return std::nullopt;
    }
  };
  auto try_llm = [&]() -> std::optional<CaptionDecomposition> {
    if (llm == nullptr) return std::nullopt;
    try {
      return run_llm_path(caption, *llm, options);
    } catch (const Error& e) {
      note(e);
      return std::nullopt;
    }
  };

  std::optional<CaptionDecomposition> result;
  switch (policy) {
    case DecomposePolicy::kRuleOnly:
      result = try_rule();
      break;
    case DecomposePolicy::kLlmOnly:
      result = try_llm();
      break;
    case DecomposePolicy::kRuleFirst:
      result = try_rule();
      if (!result) result = try_llm();
      break;
    case DecomposePolicy::kLlmFirst:
      result = try_llm();
      if (!result) {
        const bool llm_attempted = llm != nullptr;
        result = try_rule();
        if (result && llm_attempted) result->source = DecompositionSource::kLlmFallbackRuleBased;
      }
      break;
  }
  if (!result) {
    throw Error(ErrorCode::kDecompositionFailed,
                "no permitted path decomposed '" + std::string(caption) + "' (" + failures + ")");
  }
  result->validate();
  return std::move(*result);
}

}  // namespace compalign
