#include "compalign/backends/http_provider.hpp"

#include <chrono>
#include <string>

#include "compalign/core/digest.hpp"
#include "compalign/core/image_io.hpp"
#include "compalign/error.hpp"
#include "httplib.h"

namespace compalign {

namespace {

[[noreturn]] void provider_error(const std::string& why) {
  throw Error(ErrorCode::kProviderError, why);
}

std::string error_message(const httplib::Response& res) {
  Json j = Json::parse(res.body, nullptr, /*allow_exceptions=*/false);
  if (!j.is_discarded() && j.is_object() && j.contains("error") && j["error"].is_string()) {
    return j["error"].get<std::string>();
  }
  return res.body.substr(0, 200);
}

std::string image_payload(const Image& image) { return base64_encode(encode_png(image)); }

}  // namespace

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& url = config_.location;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw Error(ErrorCode::kConfigError, "http backend needs an http:// URL, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

Json HttpProvider::post(const std::string& path, const Json& body) const {
  const std::string payload = dump_compact(body);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  std::string last_failure;
  for (int attempt = 0; attempt <= config_.retry_budget; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (config_.bearer_token) client.set_bearer_token_auth(*config_.bearer_token);

    auto res = client.Post(path_prefix_ + path, payload, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status) + ": " + error_message(*res);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      provider_error(path + " returned HTTP " + std::to_string(res->status) + ": " +
                     error_message(*res));
    }
    Json j = Json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) provider_error(path + " returned a non-JSON body");
    return j;
  }
  provider_error(path + " failed after " + std::to_string(config_.retry_budget + 1) +
                 " attempts; last: " + last_failure);
}

EmbeddingVector HttpProvider::parse_vector(const Json& response, const std::string& path) const {
  const auto it = response.find("vector");
  if (it == response.end() || !it->is_array() || it->empty()) {
    provider_error(path + " response lacks a nonempty 'vector'");
  }
  std::vector<double> values;
  values.reserve(it->size());
  for (const auto& x : *it) {
    if (!x.is_number()) provider_error(path + " vector holds a non-number");
    values.push_back(x.get<double>());
  }
  std::size_t expected = 0;
  if (!session_dim_.compare_exchange_strong(expected, values.size()) &&
      expected != values.size()) {
    provider_error(path + " dimension mismatch: got " + std::to_string(values.size()) +
                   ", session dim is " + std::to_string(expected));
  }
  try {
    return EmbeddingVector(std::move(values));
  } catch (const Error& e) {
    provider_error(path + ": " + e.what());
  }
}

EmbeddingVector HttpProvider::embed_image(const Image& image) const {
  const std::string path = "/v1/embed/image";
  return parse_vector(post(path, Json{{"image_png_b64", image_payload(image)}}), path);
}

EmbeddingVector HttpProvider::embed_text(std::string_view text) const {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "embed_text of empty string");
  const std::string path = "/v1/embed/text";
  return parse_vector(post(path, Json{{"text", std::string(text)}}), path);
}

std::vector<Detection> HttpProvider::detect(const Image& image, std::string_view phrase,
                                            double threshold) const {
  if (phrase.empty()) throw Error(ErrorCode::kInvalidArgument, "detect with empty phrase");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "detection threshold outside [0,1]");
  }
  const std::string path = "/v1/detect";
  Json body;
  body["image_png_b64"] = image_payload(image);
  body["phrase"] = std::string(phrase);
  body["box_threshold"] = threshold;
  const Json response = post(path, body);
  const auto it = response.find("detections");
  if (it == response.end() || !it->is_array()) provider_error(path + " response lacks 'detections'");
  std::vector<Detection> out;
  for (const auto& d : *it) {
    double x, y, w, h, confidence;
    try {
      x = d.at("x").get<double>();
      y = d.at("y").get<double>();
      w = d.at("w").get<double>();
      h = d.at("h").get<double>();
      confidence = d.at("confidence").get<double>();
    } catch (const Json::exception& e) {
      provider_error(path + " malformed detection: " + e.what());
    }
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
      provider_error(path + " confidence outside [0,1]");
    }
    if (auto box = BoundingBox::from_detector(x, y, w, h, image.width(), image.height())) {
      out.push_back(Detection{*box, confidence, std::string(phrase)});
    }
  }
  return filter_and_sort(std::move(out), threshold);
}

std::string HttpProvider::complete(std::string_view prompt) const {
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "complete with empty prompt");
  const std::string path = "/v1/complete";
  const Json response = post(path, Json{{"prompt", std::string(prompt)}});
  const auto it = response.find("text");
  if (it == response.end() || !it->is_string()) provider_error(path + " response lacks 'text'");
  return it->get<std::string>();
}

}  // namespace compalign
