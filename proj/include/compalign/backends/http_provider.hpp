#pragma once

#include <atomic>
#include <cstddef>
#include <string>
#include <string_view>

#include "compalign/backends/provider.hpp"
#include "compalign/backends/provider_config.hpp"
#include "compalign/core/json_output.hpp"

namespace compalign {

/// Client for the model-server wire protocol (all POST, JSON bodies):
///   /v1/embed/image  {"image_png_b64"}                          -> {"vector"}
///   /v1/embed/text   {"text"}                                   -> {"vector"}
///   /v1/detect       {"image_png_b64","phrase","box_threshold"} -> {"detections":[{x,y,w,h,confidence}]}
///   /v1/complete     {"prompt"}                                 -> {"text"}
/// Errors arrive as non-2xx with {"error"}.
///
/// Each request opens its own connection, so one instance serves any number
/// of threads. Transport failures and 5xx responses are retried at most
/// retry_budget times; 4xx responses are not retried. Every vector returned
/// by one instance must share the dim of the first one.
class HttpProvider : public Embedder, public PhraseDetector, public LlmProvider {
 public:
  explicit HttpProvider(ProviderConfig config);

  EmbeddingVector embed_image(const Image& image) const override;
  EmbeddingVector embed_text(std::string_view text) const override;
  std::vector<Detection> detect(const Image& image, std::string_view phrase,
                                double threshold) const override;
  std::string complete(std::string_view prompt) const override;

  const ProviderConfig& config() const noexcept { return config_; }

 private:
  Json post(const std::string& path, const Json& body) const;
  EmbeddingVector parse_vector(const Json& response, const std::string& path) const;

  ProviderConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  mutable std::atomic<std::size_t> session_dim_{0};
};

}  // namespace compalign
