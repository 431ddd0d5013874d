#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compalign/core/image.hpp"

namespace compalign {

/// Which part of the triplet differs between the positive and negative image.
enum class Component { kSubject, kRelation, kObject, kUnknown };

std::string_view to_string(Component c);
/// Throws InvalidArgument on an unknown name.
Component parse_component(std::string_view name);

struct MatchRecord {
  std::string caption;
  std::string positive_image_id;
  std::string negative_image_id;
  Component component = Component::kUnknown;
};

struct RetrievalQuery {
  std::string caption;
  std::string gold_image_id;
};

// JSONL readers. Throw IoError when the file cannot be opened and
// InvalidArgument (with file:line) on a malformed line.
std::vector<MatchRecord> load_match_records(const std::filesystem::path& path);
std::vector<RetrievalQuery> load_retrieval_queries(const std::filesystem::path& path);

/// Corpus manifest: one {"image_id", "path"} per line; relative paths
/// resolve against the manifest's directory.
class ImageCatalog {
 public:
  static ImageCatalog load(const std::filesystem::path& manifest);

  bool contains(std::string_view id) const;
  /// Manifest order.
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::filesystem::path& path_of(std::string_view id) const;

  /// Decodes the image and checks that its pixel digest equals the id.
  /// Throws IoError / ImageDecode / InvalidArgument.
  Image load_image(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::filesystem::path, std::less<>> paths_;
};

/// Image or the reason it could not be loaded.
struct LoadedImage {
  std::optional<Image> image;
  std::string error;
};

std::map<std::string, LoadedImage> load_images(const ImageCatalog& catalog,
                                               const std::vector<std::string>& ids);

}  // namespace compalign
