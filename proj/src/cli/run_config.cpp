#include "compalign/cli/run_config.hpp"

#include <fstream>
#include <map>

#include "compalign/backends/fixture_store.hpp"
#include "compalign/backends/http_provider.hpp"
#include "compalign/error.hpp"

namespace compalign::cli {

namespace {

[[noreturn]] void config_error(const std::string& why) {
  throw Error(ErrorCode::kConfigError, why);
}

ProviderConfig provider_from_json(const Json& j, const std::filesystem::path& base_dir,
                                  const char* role) {
  ProviderConfig c;
  if (j.is_string()) {
    c = parse_provider_locator(j.get<std::string>());
  } else if (j.is_object()) {
    const auto kind = j.value("kind", std::string("fixture"));
    if (kind == "fixture") {
      c.kind = ProviderKind::kFixture;
    } else if (kind == "http") {
      c.kind = ProviderKind::kHttp;
    } else {
      config_error(std::string(role) + ": unknown provider kind '" + kind + "'");
    }
    c.location = j.value("location", std::string());
    c.box_threshold = j.value("box_threshold", c.box_threshold);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.retry_budget = j.value("retry_budget", c.retry_budget);
    if (j.contains("bearer_token")) c.bearer_token = j["bearer_token"].get<std::string>();
  } else {
    config_error(std::string(role) + " must be a locator string or an object");
  }
  if (c.kind == ProviderKind::kFixture && std::filesystem::path(c.location).is_relative()) {
    c.location = (base_dir / c.location).lexically_normal().string();
  }
  return c;
}

std::shared_ptr<const FixtureStore> shared_store(
    const std::string& dir, std::map<std::string, std::shared_ptr<const FixtureStore>>& cache) {
  auto& slot = cache[dir];
  if (!slot) slot = std::make_shared<const FixtureStore>(FixtureStore::load(dir));
  return slot;
}

}  // namespace

void RunConfig::validate() const {
  if (workers < 1) config_error("workers must be >= 1");
  if (topk < 1) config_error("topk must be >= 1");
  for (int k : recall_ks) {
    if (k < 1) config_error("recall k values must be >= 1");
  }
  for (const auto* p : {&embedder, &detector, &llm}) {
    if (!*p) continue;
    (*p)->validate();
    if ((*p)->kind == ProviderKind::kFixture && !std::filesystem::is_directory((*p)->location)) {
      config_error("fixture directory " + (*p)->location + " does not exist");
    }
  }
}

Json RunConfig::to_json() const {
  Json j;
  j["embedder"] = embedder ? embedder->to_json() : Json(nullptr);
  j["detector"] = detector ? detector->to_json() : Json(nullptr);
  j["llm"] = llm ? llm->to_json() : Json(nullptr);
  j["fusion"] = fusion.to_json();
  j["policy"] = std::string(to_string(policy));
  j["box_threshold"] = detector ? detector->box_threshold : kDefaultBoxThreshold;
  j["prompts"] = Json{{"stage1", stage1_prompt.empty() ? "builtin" : stage1_prompt.string()},
                      {"stage2", stage2_prompt.empty() ? "builtin" : stage2_prompt.string()}};
  return j;
}

RunConfig RunConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("embedder") && !j["embedder"].is_null()) {
      c.embedder = provider_from_json(j["embedder"], base_dir, "embedder");
    }
    if (j.contains("detector") && !j["detector"].is_null()) {
      c.detector = provider_from_json(j["detector"], base_dir, "detector");
    }
    if (j.contains("llm") && !j["llm"].is_null()) {
      c.llm = provider_from_json(j["llm"], base_dir, "llm");
    }
    if (j.contains("fusion")) c.fusion = FusionConfig::from_json(j["fusion"]);
    if (j.contains("policy")) c.policy = parse_decompose_policy(j["policy"].get<std::string>());
    if (j.contains("prompts")) {
      const auto& p = j["prompts"];
      auto resolve = [&](const char* key) -> std::filesystem::path {
        if (!p.contains(key)) return {};
        std::filesystem::path path = p[key].get<std::string>();
        return path.is_relative() ? base_dir / path : path;
      };
      c.stage1_prompt = resolve("stage1");
      c.stage2_prompt = resolve("stage2");
    }
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    c.workers = j.value("workers", c.workers);
    c.topk = j.value("topk", c.topk);
    if (j.contains("recall_ks")) c.recall_ks = j["recall_ks"].get<std::vector<int>>();
  } catch (const Json::exception& e) {
    config_error(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) config_error("cannot read config file " + file.string());
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) config_error("config file " + file.string() + " is not valid JSON");
  return from_json(j, file.parent_path());
}

ScoringOptions RunConfig::scoring_options() const {
  ScoringOptions o;
  o.fusion = fusion;
  o.decompose.policy = policy;
  o.decompose.templates = load_prompt_templates(stage1_prompt, stage2_prompt);
  if (llm) o.decompose.retry_budget = llm->retry_budget;
  o.box_threshold = detector ? detector->box_threshold : kDefaultBoxThreshold;
  return o;
}

Backends::Backends(const RunConfig& config) {
  std::map<std::string, std::shared_ptr<const FixtureStore>> stores;
  if (const auto& c = config.embedder) {
    if (c->kind == ProviderKind::kFixture) {
      embedder_ = std::make_shared<FixtureEmbedder>(shared_store(c->location, stores));
    } else {
      embedder_ = std::make_shared<HttpProvider>(*c);
    }
  }
  if (const auto& c = config.detector) {
    if (c->kind == ProviderKind::kFixture) {
      detector_ = std::make_shared<FixtureDetector>(shared_store(c->location, stores));
    } else {
      detector_ = std::make_shared<HttpProvider>(*c);
    }
  }
  if (const auto& c = config.llm) {
    if (c->kind == ProviderKind::kFixture) {
      llm_ = std::make_shared<FixtureLlm>(shared_store(c->location, stores));
    } else {
      llm_ = std::make_shared<HttpProvider>(*c);
    }
  }
}

}  // namespace compalign::cli
