#include "kite/codec.hpp"

#include <array>
#include <cstring>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <zlib.h>

#include "kite/error.hpp"

namespace kite {

namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
constexpr int kZlibLevel = 6;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5],
               std::span<const std::uint8_t> payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + payload.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

// color_type 2 = truecolor, 0 = grayscale.
std::vector<std::uint8_t> assemble_png(int width, int height, std::uint8_t bit_depth,
                                       std::uint8_t color_type,
                                       const std::vector<std::uint8_t>& scanlines) {
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(bit_depth);
  ihdr.push_back(color_type);
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // adaptive filtering
  ihdr.push_back(0);  // no interlace

  uLongf compressed_size = compressBound(static_cast<uLong>(scanlines.size()));
  std::vector<std::uint8_t> idat(compressed_size);
  if (compress2(idat.data(), &compressed_size, scanlines.data(),
                static_cast<uLong>(scanlines.size()), kZlibLevel) != Z_OK) {
    throw Error(ErrorCode::kIoFailure, "codec", "zlib compression failed");
  }
  idat.resize(compressed_size);

  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", idat);
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  if (image.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "codec", "cannot encode an empty image");
  }
  const std::size_t stride = static_cast<std::size_t>(image.width()) * 3;
  std::vector<std::uint8_t> scanlines;
  scanlines.reserve((stride + 1) * image.height());
  const auto px = image.bytes();
  for (int y = 0; y < image.height(); ++y) {
    scanlines.push_back(0);  // filter: none
    const auto row = px.subspan(y * stride, stride);
    scanlines.insert(scanlines.end(), row.begin(), row.end());
  }
  return assemble_png(image.width(), image.height(), 8, 2, scanlines);
}

std::vector<std::uint8_t> encode_png_gray16(const Gray16Raster& raster) {
  if (raster.width <= 0 || raster.height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "codec", "cannot encode an empty raster");
  }
  std::vector<std::uint8_t> scanlines;
  scanlines.reserve((static_cast<std::size_t>(raster.width) * 2 + 1) * raster.height);
  for (int y = 0; y < raster.height; ++y) {
    scanlines.push_back(0);
    for (int x = 0; x < raster.width; ++x) {
      const std::uint16_t v = raster.at(x, y);
      scanlines.push_back(static_cast<std::uint8_t>(v >> 8));
      scanlines.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
  }
  return assemble_png(raster.width, raster.height, 16, 0, scanlines);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  // Tolerate the data-URL prefix some clients prepend.
  if (const auto comma = text.find(";base64,"); comma != std::string_view::npos) {
    text.remove_prefix(comma + 8);
  }
  std::string compact;
  compact.reserve(text.size());
  for (char c : text) {
    if (c != '\n' && c != '\r' && c != ' ' && c != '\t') compact.push_back(c);
  }
  if (compact.size() % 4 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "codec", "base64 length is not a multiple of 4");
  }
  std::vector<std::uint8_t> out(compact.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(compact.data()),
                                static_cast<int>(compact.size()));
  if (n < 0) {
    throw Error(ErrorCode::kInvalidArgument, "codec", "malformed base64");
  }
  std::size_t padding = 0;
  if (!compact.empty() && compact.back() == '=') ++padding;
  if (compact.size() > 1 && compact[compact.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace kite
