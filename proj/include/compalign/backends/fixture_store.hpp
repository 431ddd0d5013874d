#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "compalign/backends/provider.hpp"

namespace compalign {

/// Box as stored in a fixture, in pixels of the referenced image.
struct StoredBox {
  double x = 0, y = 0, w = 0, h = 0;
  double confidence = 0;
};

/// Ground truth for the fixture providers, loaded from JSONL:
///   image_embeddings.jsonl  {"image_id", "vector"}
///   text_embeddings.jsonl   {"text", "vector"}
///   detections.jsonl        {"image_id", "phrase", "boxes": [{"x","y","w","h","confidence"}]}
///   llm_replies.jsonl       {"prompt_sha256", "reply"}
/// Absent files load as empty tables. Keys are exact strings.
class FixtureStore {
 public:
  static FixtureStore load(const std::filesystem::path& dir);

  // Builders for in-memory stores. Each enforces the single-dim and
  // unique-key invariants and throws InvalidFixture.
  FixtureStore& add_image_embedding(std::string image_id, EmbeddingVector v);
  FixtureStore& add_text_embedding(std::string text, EmbeddingVector v);
  FixtureStore& add_detections(std::string image_id, std::string phrase,
                               std::vector<StoredBox> boxes);
  FixtureStore& add_llm_reply_for_prompt(std::string_view prompt, std::string reply);
  FixtureStore& add_llm_reply(std::string prompt_sha256, std::string reply);

  const EmbeddingVector* image_embedding(std::string_view image_id) const;
  const EmbeddingVector* text_embedding(std::string_view text) const;
  /// nullptr when the (image, phrase) key is absent.
  const std::vector<StoredBox>* detections(std::string_view image_id,
                                           std::string_view phrase) const;
  const std::string* llm_reply(std::string_view prompt_sha256) const;

  std::optional<std::size_t> dim() const noexcept { return dim_; }

  /// Writes the four JSONL files (sorted by key) into dir.
  void save(const std::filesystem::path& dir) const;

 private:
  void check_dim(const EmbeddingVector& v, std::string_view what);

  std::map<std::string, EmbeddingVector, std::less<>> image_embeddings_;
  std::map<std::string, EmbeddingVector, std::less<>> text_embeddings_;
  std::map<std::pair<std::string, std::string>, std::vector<StoredBox>> detections_;
  std::map<std::string, std::string, std::less<>> llm_replies_;
  std::optional<std::size_t> dim_;
};

class FixtureEmbedder : public Embedder {
 public:
  explicit FixtureEmbedder(std::shared_ptr<const FixtureStore> store);
  EmbeddingVector embed_image(const Image& image) const override;
  EmbeddingVector embed_text(std::string_view text) const override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

/// Absent keys mean "no detections".
class FixtureDetector : public PhraseDetector {
 public:
  explicit FixtureDetector(std::shared_ptr<const FixtureStore> store);
  std::vector<Detection> detect(const Image& image, std::string_view phrase,
                                double threshold) const override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

/// Keyed on the SHA-256 of the prompt.
class FixtureLlm : public LlmProvider {
 public:
  explicit FixtureLlm(std::shared_ptr<const FixtureStore> store);
  std::string complete(std::string_view prompt) const override;

 private:
  std::shared_ptr<const FixtureStore> store_;
};

}  // namespace compalign
