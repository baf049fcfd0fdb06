#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kite/image.hpp"

namespace kite {

/// Deterministic PNG writer: no filtering, fixed zlib level, no ancillary
/// chunks. Identical pixels always produce identical bytes.
std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png_gray16(const Gray16Raster& raster);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws Error(kInvalidArgument) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace kite
