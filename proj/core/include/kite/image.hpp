#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace kite {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};

/// Row-major 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = kBlack);
  RgbImage(int width, int height, std::vector<std::uint8_t> interleaved_rgb);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  /// Bounds-checked write; out-of-canvas coordinates are ignored.
  void plot(int x, int y, Rgb c);

  std::span<const std::uint8_t> bytes() const noexcept { return data_; }
  std::span<std::uint8_t> bytes() noexcept { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Single-channel row-major raster.
template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> values;

  Raster() = default;
  Raster(int w, int h, T fill = T{})
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

using DepthRaster = Raster<double>;
using Gray16Raster = Raster<std::uint16_t>;

/// Decodes PNG or JPEG bytes into RGB. Throws Error(kDecodeFailure).
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage read_image_file(const std::filesystem::path& path);

/// Decodes a single-channel PNG (8 or 16 bit) as 16-bit samples.
Gray16Raster decode_gray16(std::span<const std::uint8_t> bytes);

/// Area-averaging resize.
RgbImage resize_area(const RgbImage& src, int width, int height);

/// Exact 2x2 box-filter downsample (odd trailing row/column dropped).
RgbImage downsample_2x(const RgbImage& src);

/// Copies `src` into `dst` with its top-left corner at (x, y), clipped.
void blit(RgbImage& dst, const RgbImage& src, int x, int y);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace kite
