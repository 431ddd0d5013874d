#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace compalign {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws InvalidArgument on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace compalign
