#include "compalign/backends/fixture_store.hpp"

#include <fstream>
#include <string>

#include "compalign/core/digest.hpp"
#include "compalign/core/json_output.hpp"
#include "compalign/error.hpp"

namespace compalign {

namespace {

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::kInvalidFixture, why); }

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    Json j = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) corrupt(where + ": not a JSON object");
    try {
      fn(j);
    } catch (const Json::exception& e) {
      corrupt(where + ": " + e.what());
    } catch (const Error& e) {
      corrupt(where + ": " + e.what());
    }
  }
}

EmbeddingVector vector_field(const Json& j) {
  return EmbeddingVector(j.at("vector").get<std::vector<double>>());
}

Json vector_json(const EmbeddingVector& v) {
  Json arr = Json::array();
  for (double x : v.values()) arr.push_back(x);
  return arr;
}

void write_lines(const std::filesystem::path& path, const std::vector<Json>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& j : lines) out << dump_compact(j) << '\n';
}

}  // namespace

FixtureStore FixtureStore::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kConfigError, "fixture directory " + dir.string() + " does not exist");
  }
  FixtureStore store;
  for_each_line(dir / "image_embeddings.jsonl", [&](const Json& j) {
    store.add_image_embedding(j.at("image_id").get<std::string>(), vector_field(j));
  });
  for_each_line(dir / "text_embeddings.jsonl", [&](const Json& j) {
    store.add_text_embedding(j.at("text").get<std::string>(), vector_field(j));
  });
  for_each_line(dir / "detections.jsonl", [&](const Json& j) {
    std::vector<StoredBox> boxes;
    for (const auto& b : j.at("boxes")) {
      boxes.push_back(StoredBox{b.at("x").get<double>(), b.at("y").get<double>(),
                                b.at("w").get<double>(), b.at("h").get<double>(),
                                b.at("confidence").get<double>()});
    }
    store.add_detections(j.at("image_id").get<std::string>(), j.at("phrase").get<std::string>(),
                         std::move(boxes));
  });
  for_each_line(dir / "llm_replies.jsonl", [&](const Json& j) {
    store.add_llm_reply(j.at("prompt_sha256").get<std::string>(), j.at("reply").get<std::string>());
  });
  return store;
}

void FixtureStore::check_dim(const EmbeddingVector& v, std::string_view what) {
  if (!dim_) {
    dim_ = v.dim();
  } else if (*dim_ != v.dim()) {
    corrupt(std::string(what) + " has dim " + std::to_string(v.dim()) + ", store dim is " +
            std::to_string(*dim_));
  }
}

FixtureStore& FixtureStore::add_image_embedding(std::string image_id, EmbeddingVector v) {
  check_dim(v, "image embedding " + image_id);
  if (!image_embeddings_.emplace(image_id, std::move(v)).second) {
    corrupt("duplicate image embedding " + image_id);
  }
  return *this;
}

FixtureStore& FixtureStore::add_text_embedding(std::string text, EmbeddingVector v) {
  check_dim(v, "text embedding '" + text + "'");
  if (!text_embeddings_.emplace(text, std::move(v)).second) {
    corrupt("duplicate text embedding '" + text + "'");
  }
  return *this;
}

FixtureStore& FixtureStore::add_detections(std::string image_id, std::string phrase,
                                           std::vector<StoredBox> boxes) {
  for (const auto& b : boxes) {
    if (!(b.confidence >= 0.0 && b.confidence <= 1.0)) {
      corrupt("detection confidence outside [0,1] for '" + phrase + "'");
    }
  }
  auto key = std::make_pair(image_id, phrase);
  if (!detections_.emplace(std::move(key), std::move(boxes)).second) {
    corrupt("duplicate detections for (" + image_id + ", '" + phrase + "')");
  }
  return *this;
}

FixtureStore& FixtureStore::add_llm_reply_for_prompt(std::string_view prompt, std::string reply) {
  return add_llm_reply(sha256_hex(prompt), std::move(reply));
}

FixtureStore& FixtureStore::add_llm_reply(std::string prompt_sha256, std::string reply) {
  if (!llm_replies_.emplace(prompt_sha256, std::move(reply)).second) {
    corrupt("duplicate llm reply for prompt digest " + prompt_sha256);
  }
  return *this;
}

const EmbeddingVector* FixtureStore::image_embedding(std::string_view image_id) const {
  const auto it = image_embeddings_.find(image_id);
  return it == image_embeddings_.end() ? nullptr : &it->second;
}

const EmbeddingVector* FixtureStore::text_embedding(std::string_view text) const {
  const auto it = text_embeddings_.find(text);
  return it == text_embeddings_.end() ? nullptr : &it->second;
}

const std::vector<StoredBox>* FixtureStore::detections(std::string_view image_id,
                                                       std::string_view phrase) const {
  const auto it = detections_.find(std::make_pair(std::string(image_id), std::string(phrase)));
  return it == detections_.end() ? nullptr : &it->second;
}

const std::string* FixtureStore::llm_reply(std::string_view prompt_sha256) const {
  const auto it = llm_replies_.find(prompt_sha256);
  return it == llm_replies_.end() ? nullptr : &it->second;
}

void FixtureStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<Json> lines;
  for (const auto& [id, v] : image_embeddings_) {
    lines.push_back(Json{{"image_id", id}, {"vector", vector_json(v)}});
  }
  write_lines(dir / "image_embeddings.jsonl", lines);
  lines.clear();
  for (const auto& [text, v] : text_embeddings_) {
    lines.push_back(Json{{"text", text}, {"vector", vector_json(v)}});
  }
  write_lines(dir / "text_embeddings.jsonl", lines);
  lines.clear();
  for (const auto& [key, boxes] : detections_) {
    Json arr = Json::array();
    for (const auto& b : boxes) {
      arr.push_back(Json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"confidence", b.confidence}});
    }
    lines.push_back(Json{{"image_id", key.first}, {"phrase", key.second}, {"boxes", arr}});
  }
  write_lines(dir / "detections.jsonl", lines);
  lines.clear();
  for (const auto& [digest, reply] : llm_replies_) {
    lines.push_back(Json{{"prompt_sha256", digest}, {"reply", reply}});
  }
  write_lines(dir / "llm_replies.jsonl", lines);
}

FixtureEmbedder::FixtureEmbedder(std::shared_ptr<const FixtureStore> store)
    : store_(std::move(store)) {}

EmbeddingVector FixtureEmbedder::embed_image(const Image& image) const {
  if (const auto* v = store_->image_embedding(image.id())) return *v;
  throw Error(ErrorCode::kMissingFixture, "no image embedding for id " + image.id());
}

EmbeddingVector FixtureEmbedder::embed_text(std::string_view text) const {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "embed_text of empty string");
  if (const auto* v = store_->text_embedding(text)) return *v;
  throw Error(ErrorCode::kMissingFixture, "no text embedding for '" + std::string(text) + "'");
}

FixtureDetector::FixtureDetector(std::shared_ptr<const FixtureStore> store)
    : store_(std::move(store)) {}

std::vector<Detection> FixtureDetector::detect(const Image& image, std::string_view phrase,
                                               double threshold) const {
  if (phrase.empty()) throw Error(ErrorCode::kInvalidArgument, "detect with empty phrase");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "detection threshold outside [0,1]");
  }
  std::vector<Detection> out;
  const auto* stored = store_->detections(image.id(), phrase);
  if (stored == nullptr) return out;
  for (const auto& b : *stored) {
    auto box = BoundingBox::from_detector(b.x, b.y, b.w, b.h, image.width(), image.height());
    if (box) out.push_back(Detection{*box, b.confidence, std::string(phrase)});
  }
  return filter_and_sort(std::move(out), threshold);
}

FixtureLlm::FixtureLlm(std::shared_ptr<const FixtureStore> store) : store_(std::move(store)) {}

std::string FixtureLlm::complete(std::string_view prompt) const {
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "complete with empty prompt");
  const auto digest = sha256_hex(prompt);
  if (const auto* reply = store_->llm_reply(digest)) return *reply;
  throw Error(ErrorCode::kMissingFixture, "no llm reply for prompt digest " + digest);
}

}  // namespace compalign
