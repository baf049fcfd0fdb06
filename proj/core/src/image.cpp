#include "kite/image.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "kite/error.hpp"

namespace kite {

namespace {

constexpr const char* kModule = "image";

std::size_t offset(int width, int x, int y) {
  return (static_cast<std::size_t>(y) * width + x) * 3;
}

RgbImage from_bgr_mat(const cv::Mat& bgr) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(rgb.cols) * rgb.rows * 3);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<std::uint8_t>(y);
    std::copy(row, row + rgb.cols * 3, data.begin() + offset(rgb.cols, 0, y));
  }
  return RgbImage(rgb.cols, rgb.rows, std::move(data));
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "negative image dimensions");
  }
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> interleaved_rgb)
    : width_(width), height_(height), data_(std::move(interleaved_rgb)) {
  if (width < 0 || height < 0 ||
      data_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("buffer of {} bytes does not match {}x{} RGB", data_.size(),
                            width, height));
  }
}

Rgb RgbImage::at(int x, int y) const {
  const auto o = offset(width_, x, y);
  return {data_[o], data_[o + 1], data_[o + 2]};
}

void RgbImage::set(int x, int y, Rgb c) {
  const auto o = offset(width_, x, y);
  data_[o] = c.r;
  data_[o + 1] = c.g;
  data_[o + 2] = c.b;
}

void RgbImage::plot(int x, int y, Rgb c) {
  if (x >= 0 && y >= 0 && x < width_ && y < height_) set(x, y, c);
}

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) {
    throw Error(ErrorCode::kDecodeFailure, kModule, "empty image buffer");
  }
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat bgr = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw Error(ErrorCode::kDecodeFailure, kModule, "not a decodable PNG/JPEG image");
  }
  return from_bgr_mat(bgr);
}

RgbImage read_image_file(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kDecodeFailure, kModule,
                fmt::format("cannot read {}", path.string()));
  }
  return decode_image(bytes);
}

Gray16Raster decode_gray16(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) {
    throw Error(ErrorCode::kDecodeFailure, kModule, "empty image buffer");
  }
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat m = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  if (m.empty()) {
    throw Error(ErrorCode::kDecodeFailure, kModule, "not a decodable grayscale image");
  }
  if (m.channels() != 1) {
    throw Error(ErrorCode::kDecodeFailure, kModule,
                fmt::format("expected 1 channel, got {}", m.channels()));
  }
  if (m.depth() == CV_8U) {
    m.convertTo(m, CV_16U, 257.0);
  } else if (m.depth() != CV_16U) {
    throw Error(ErrorCode::kDecodeFailure, kModule, "unsupported sample depth");
  }
  Gray16Raster out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint16_t>(y);
    std::copy(row, row + m.cols, out.values.begin() + static_cast<std::ptrdiff_t>(y) * m.cols);
  }
  return out;
}

RgbImage resize_area(const RgbImage& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  const cv::Mat in(src.height(), src.width(), CV_8UC3,
                   const_cast<std::uint8_t*>(src.bytes().data()));
  cv::Mat out;
  const bool shrinking = width <= src.width() && height <= src.height();
  cv::resize(in, out, cv::Size(width, height), 0, 0,
             shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    const auto* row = out.ptr<std::uint8_t>(y);
    std::copy(row, row + width * 3, data.begin() + offset(width, 0, y));
  }
  return RgbImage(width, height, std::move(data));
}

RgbImage downsample_2x(const RgbImage& src) {
  const int w = src.width() / 2;
  const int h = src.height() / 2;
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb a = src.at(2 * x, 2 * y);
      const Rgb b = src.at(2 * x + 1, 2 * y);
      const Rgb c = src.at(2 * x, 2 * y + 1);
      const Rgb d = src.at(2 * x + 1, 2 * y + 1);
      auto avg = [](int p, int q, int r, int s) {
        return static_cast<std::uint8_t>((p + q + r + s + 2) / 4);
      };
      out.set(x, y, {avg(a.r, b.r, c.r, d.r), avg(a.g, b.g, c.g, d.g),
                     avg(a.b, b.b, c.b, d.b)});
    }
  }
  return out;
}

void blit(RgbImage& dst, const RgbImage& src, int x, int y) {
  for (int sy = 0; sy < src.height(); ++sy) {
    for (int sx = 0; sx < src.width(); ++sx) {
      dst.plot(x + sx, y + sy, src.at(sx, sy));
    }
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "io", fmt::format("cannot open {}", path.string()));
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "io", fmt::format("cannot write {}", path.string()));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "io", fmt::format("short write to {}", path.string()));
  }
}

}  // namespace kite
