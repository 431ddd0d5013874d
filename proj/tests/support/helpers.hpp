#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "compalign/backends/provider.hpp"
#include "compalign/core/image.hpp"

namespace compalign::testing {

inline Image white_image(int w, int h) { return Image::filled(w, h, Rgb{255, 255, 255}); }

/// Distinct nonzero pixels per (seed, x, y).
inline Image patterned_image(int w, int h, int seed) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      rgb.push_back(static_cast<std::uint8_t>(1 + (seed * 37 + x * 3) % 250));
      rgb.push_back(static_cast<std::uint8_t>(1 + (seed * 11 + y * 5) % 250));
      rgb.push_back(static_cast<std::uint8_t>(1 + (seed * 7 + x * y) % 250));
    }
  }
  return Image(w, h, std::move(rgb));
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

/// LLM answering from a prompt -> reply function and counting calls.
class ScriptedLlm : public LlmProvider {
 public:
  explicit ScriptedLlm(std::function<std::string(std::string_view)> fn) : fn_(std::move(fn)) {}
  std::string complete(std::string_view prompt) const override {
    ++calls_;
    return fn_(prompt);
  }
  int calls() const { return calls_; }

 private:
  std::function<std::string(std::string_view)> fn_;
  mutable int calls_ = 0;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("compalign-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace compalign::testing
