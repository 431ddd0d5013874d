#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "compalign/backends/provider_config.hpp"
#include "compalign/decompose/llm_decompose.hpp"
#include "compalign/fusion/pair_scorer.hpp"

namespace compalign::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNoRecords = 1,
  kExitDecompositionFailed = 2,
  kExitUsage = 64,
  kExitConfig = 78,
};

struct RunConfig {
  std::optional<ProviderConfig> embedder;
  std::optional<ProviderConfig> detector;
  std::optional<ProviderConfig> llm;
  FusionConfig fusion;
  DecomposePolicy policy = DecomposePolicy::kRuleFirst;
  std::filesystem::path stage1_prompt;  // empty: built-in template
  std::filesystem::path stage2_prompt;
  std::filesystem::path out;
  int workers = 1;
  std::size_t topk = 10;
  std::vector<int> recall_ks{1, 5};

  /// Throws ConfigError: workers < 1, missing fixture directory, bad ranges.
  void validate() const;

  /// Reproducibility echo for reports. Leaves out workers and the output
  /// path, which must not change report bytes.
  Json to_json() const;

  /// Mirrors to_json plus "workers", "out" and "prompts". Relative fixture
  /// and prompt paths resolve against base_dir. Throws ConfigError.
  static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& file);

  ScoringOptions scoring_options() const;
};

/// Owns the provider instances built from a RunConfig. Fixture roles
/// pointing at the same directory share one loaded store.
class Backends {
 public:
  explicit Backends(const RunConfig& config);

  Providers handles() const noexcept {
    return Providers{embedder_.get(), detector_.get(), llm_.get()};
  }

 private:
  std::shared_ptr<const Embedder> embedder_;
  std::shared_ptr<const PhraseDetector> detector_;
  std::shared_ptr<const LlmProvider> llm_;
};

}  // namespace compalign::cli
