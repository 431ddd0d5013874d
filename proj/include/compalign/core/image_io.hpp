#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "compalign/core/image.hpp"

namespace compalign {

// PNG and baseline JPEG decoding into 8-bit RGB. Alpha is dropped, gray is
// expanded, 16-bit PNG is stripped to 8 bits.
Image decode_png(std::span<const std::uint8_t> data);
Image decode_jpeg(std::span<const std::uint8_t> data);

/// Sniffs the signature and dispatches to the matching decoder.
Image decode_image(std::span<const std::uint8_t> data);
Image load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& image);
void save_png(const Image& image, const std::filesystem::path& path);

}  // namespace compalign
