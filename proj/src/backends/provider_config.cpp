#include "compalign/backends/provider_config.hpp"

#include <string>

#include "compalign/error.hpp"

namespace compalign {

void ProviderConfig::validate() const {
  if (!(box_threshold >= 0.0 && box_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfigError, "box_threshold must lie in [0,1]");
  }
  if (timeout_ms <= 0) throw Error(ErrorCode::kConfigError, "timeout must be positive");
  if (retry_budget < 0) throw Error(ErrorCode::kConfigError, "retry_budget must be >= 0");
  if (location.empty()) throw Error(ErrorCode::kConfigError, "provider location is empty");
}

Json ProviderConfig::to_json() const {
  Json j;
  j["kind"] = kind == ProviderKind::kFixture ? "fixture" : "http";
  j["location"] = location;
  j["box_threshold"] = box_threshold;
  j["timeout_ms"] = timeout_ms;
  j["retry_budget"] = retry_budget;
  return j;
}

ProviderConfig parse_provider_locator(std::string_view text) {
  ProviderConfig config;
  if (text.starts_with("fixture:")) {
    config.kind = ProviderKind::kFixture;
    config.location = std::string(text.substr(8));
  } else if (text.starts_with("http://")) {
    config.kind = ProviderKind::kHttp;
    config.location = std::string(text);
  } else if (text.starts_with("http:")) {
    config.kind = ProviderKind::kHttp;
    config.location = "http://" + std::string(text.substr(5));
  } else {
    throw Error(ErrorCode::kConfigError, "backend must be fixture:<dir> or http:<url>, got '" +
                                             std::string(text) + "'");
  }
  if (config.location.empty() || config.location == "http://") {
    throw Error(ErrorCode::kConfigError, "backend '" + std::string(text) + "' has no location");
  }
  return config;
}

}  // namespace compalign
