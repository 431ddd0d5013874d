#include "compalign/eval/records.hpp"

#include <fstream>

#include "compalign/core/image_io.hpp"
#include "compalign/core/json_output.hpp"
#include "compalign/error.hpp"

namespace compalign {

namespace {

template <typename Fn>
void read_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    Json j = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kInvalidArgument, where + ": not a JSON object");
    }
    try {
      fn(j);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  }
}

}  // namespace

std::string_view to_string(Component c) {
  switch (c) {
    case Component::kSubject: return "subject";
    case Component::kRelation: return "relation";
    case Component::kObject: return "object";
    case Component::kUnknown: return "unknown";
  }
  return "unknown";
}

Component parse_component(std::string_view name) {
  for (auto c : {Component::kSubject, Component::kRelation, Component::kObject,
                 Component::kUnknown}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown component '" + std::string(name) + "'");
}

std::vector<MatchRecord> load_match_records(const std::filesystem::path& path) {
  std::vector<MatchRecord> out;
  read_jsonl(path, [&](const Json& j) {
    MatchRecord r;
    r.caption = j.at("caption").get<std::string>();
    r.positive_image_id = j.at("positive_image_id").get<std::string>();
    r.negative_image_id = j.at("negative_image_id").get<std::string>();
    r.component = j.contains("component") ? parse_component(j["component"].get<std::string>())
                                          : Component::kUnknown;
    if (r.positive_image_id == r.negative_image_id) {
      throw Error(ErrorCode::kInvalidArgument, "positive and negative image are the same");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<RetrievalQuery> load_retrieval_queries(const std::filesystem::path& path) {
  std::vector<RetrievalQuery> out;
  read_jsonl(path, [&](const Json& j) {
    out.push_back(RetrievalQuery{j.at("caption").get<std::string>(),
                                 j.at("gold_image_id").get<std::string>()});
  });
  return out;
}

ImageCatalog ImageCatalog::load(const std::filesystem::path& manifest) {
  ImageCatalog catalog;
  const auto base = manifest.parent_path();
  read_jsonl(manifest, [&](const Json& j) {
    auto id = j.at("image_id").get<std::string>();
    std::filesystem::path p = j.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!catalog.paths_.emplace(id, p).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate image_id " + id);
    }
    catalog.ids_.push_back(std::move(id));
  });
  return catalog;
}

bool ImageCatalog::contains(std::string_view id) const { return paths_.find(id) != paths_.end(); }

const std::filesystem::path& ImageCatalog::path_of(std::string_view id) const {
  const auto it = paths_.find(id);
  if (it == paths_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "image id " + std::string(id) + " not in manifest");
  }
  return it->second;
}

Image ImageCatalog::load_image(std::string_view id) const {
  Image image = compalign::load_image(path_of(id));
  if (image.id() != id) {
    throw Error(ErrorCode::kInvalidArgument, path_of(id).string() + " has pixel digest " +
                                                 image.id() + ", manifest says " + std::string(id));
  }
  return image;
}

std::map<std::string, LoadedImage> load_images(const ImageCatalog& catalog,
                                               const std::vector<std::string>& ids) {
  std::map<std::string, LoadedImage> out;
  for (const auto& id : ids) {
    if (out.contains(id)) continue;
    LoadedImage loaded;
    try {
      loaded.image = catalog.load_image(id);
    } catch (const Error& e) {
      loaded.error = e.what();
    }
    out.emplace(id, std::move(loaded));
  }
  return out;
}

}  // namespace compalign
