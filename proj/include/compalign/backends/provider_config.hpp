#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "compalign/backends/provider.hpp"
#include "compalign/core/json_output.hpp"

namespace compalign {

enum class ProviderKind { kFixture, kHttp };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kFixture;
  std::string location;  // fixture directory or base URL
  double box_threshold = kDefaultBoxThreshold;
  int timeout_ms = 30000;
  int retry_budget = 2;
  std::optional<std::string> bearer_token;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;

  /// Echo for reports; never includes the bearer token.
  Json to_json() const;
};

/// Parses "fixture:<dir>", "http:<host[:port]>" or "http://<host[:port]>".
ProviderConfig parse_provider_locator(std::string_view text);

}  // namespace compalign
