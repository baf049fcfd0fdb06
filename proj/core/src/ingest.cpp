#include "kite/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "kite/error.hpp"

namespace kite {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "ingest";

struct Dimensions {
  int width = 0;
  int height = 0;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_image_extension(const fs::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](unsigned char c) { return std::isdigit(c) != 0; });
}

// Reads width/height from a PNG IHDR or JPEG SOFn header without decoding.
std::optional<Dimensions> sniff_dimensions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<unsigned char> head(64 * 1024);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));

  auto be16 = [&](std::size_t i) { return (head[i] << 8) | head[i + 1]; };
  auto be32 = [&](std::size_t i) {
    return static_cast<int>((static_cast<unsigned>(head[i]) << 24) | (head[i + 1] << 16) |
                            (head[i + 2] << 8) | head[i + 3]);
  };

  if (head.size() >= 24 && head[0] == 0x89 && head[1] == 'P' && head[2] == 'N' &&
      head[3] == 'G') {
    return Dimensions{be32(16), be32(20)};
  }
  if (head.size() >= 4 && head[0] == 0xFF && head[1] == 0xD8) {
    std::size_t i = 2;
    while (i + 9 < head.size()) {
      if (head[i] != 0xFF) return std::nullopt;
      const unsigned char marker = head[i + 1];
      if (marker == 0xFF) {
        ++i;
        continue;
      }
      const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                       marker != 0xCC;
      if (sof) return Dimensions{be16(i + 7), be16(i + 5)};
      i += 2 + static_cast<std::size_t>(be16(i + 2));
    }
  }
  return std::nullopt;
}

Dimensions frame_dimensions(const fs::path& path, ErrorCode missing_code) {
  if (!fs::is_regular_file(path)) {
    throw Error(missing_code, kModule, fmt::format("frame file {} does not exist", path.string()));
  }
  if (auto d = sniff_dimensions(path)) return *d;
  const RgbImage img = read_image_file(path);
  return {img.width(), img.height()};
}

std::vector<FrameEntry> list_directory(const fs::path& dir) {
  struct Numbered {
    unsigned long long number;
    fs::path path;
  };
  std::vector<Numbered> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_extension(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    if (!all_digits(stem)) continue;
    unsigned long long n = 0;
    std::from_chars(stem.data(), stem.data() + stem.size(), n);
    files.push_back({n, entry.path()});
  }
  std::sort(files.begin(), files.end(), [](const Numbered& a, const Numbered& b) {
    return a.number != b.number ? a.number < b.number : a.path < b.path;
  });
  std::vector<FrameEntry> out;
  out.reserve(files.size());
  for (auto& f : files) out.push_back({std::move(f.path), std::nullopt});
  return out;
}

std::vector<FrameEntry> read_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) {
    throw Error(ErrorCode::kBadManifest, kModule,
                fmt::format("cannot open manifest {}", manifest.string()));
  }
  std::vector<FrameEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kBadManifest, kModule,
                  fmt::format("line {}: expected `path<TAB>seconds`", line_no));
    }
    const std::string ts_text = line.substr(tab + 1);
    double ts = 0.0;
    const auto [ptr, ec] = std::from_chars(ts_text.data(), ts_text.data() + ts_text.size(), ts);
    if (ec != std::errc{} || ptr != ts_text.data() + ts_text.size() || !std::isfinite(ts) ||
        ts < 0.0) {
      throw Error(ErrorCode::kBadManifest, kModule,
                  fmt::format("line {}: bad timestamp '{}'", line_no, ts_text));
    }
    if (!out.empty() && ts <= *out.back().timestamp) {
      throw Error(ErrorCode::kBadManifest, kModule,
                  fmt::format("line {}: timestamps must strictly increase", line_no));
    }
    fs::path p = line.substr(0, tab);
    if (p.is_relative()) p = manifest.parent_path() / p;
    out.push_back({std::move(p), ts});
  }
  return out;
}

}  // namespace

FrameSource::FrameSource(fs::path root, VideoMeta meta, std::vector<FrameEntry> entries)
    : root_(std::move(root)), meta_(std::move(meta)), entries_(std::move(entries)) {}

double FrameSource::timestamp(long index) const {
  if (index < 0 || index >= static_cast<long>(entries_.size())) {
    throw Error(ErrorCode::kIndexOutOfRange, kModule,
                fmt::format("frame {} outside [0, {})", index, entries_.size()));
  }
  const auto& e = entries_[static_cast<std::size_t>(index)];
  return e.timestamp ? *e.timestamp : static_cast<double>(index) / meta_.fps;
}

Frame FrameSource::read_frame(long index) const {
  const double ts = timestamp(index);
  const auto& entry = entries_[static_cast<std::size_t>(index)];
  RgbImage pixels = read_image_file(entry.path);
  if (pixels.width() != meta_.width || pixels.height() != meta_.height) {
    throw Error(ErrorCode::kDecodeFailure, kModule,
                fmt::format("{} decoded as {}x{}, expected {}x{}", entry.path.string(),
                            pixels.width(), pixels.height(), meta_.width, meta_.height));
  }
  return {static_cast<int>(index), ts, std::move(pixels)};
}

FrameSource open_frame_source(const fs::path& path, double fps_hint) {
  if (!(fps_hint > 0.0) || !std::isfinite(fps_hint)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("fps must be positive, got {}", fps_hint));
  }
  std::vector<FrameEntry> entries;
  const bool manifest = fs::is_regular_file(path);
  if (manifest) {
    entries = read_manifest(path);
  } else if (fs::is_directory(path)) {
    entries = list_directory(path);
  } else {
    throw Error(ErrorCode::kEmptySource, kModule,
                fmt::format("{} is neither a frame directory nor a manifest", path.string()));
  }
  if (entries.empty()) {
    throw Error(ErrorCode::kEmptySource, kModule, fmt::format("no frames in {}", path.string()));
  }

  const ErrorCode missing = manifest ? ErrorCode::kBadManifest : ErrorCode::kDecodeFailure;
  const Dimensions first = frame_dimensions(entries.front().path, missing);
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const Dimensions d = frame_dimensions(entries[i].path, missing);
    if (d.width != first.width || d.height != first.height) {
      throw Error(ErrorCode::kDimMismatch, kModule,
                  fmt::format("{} is {}x{}, first frame is {}x{}", entries[i].path.string(),
                              d.width, d.height, first.width, first.height));
    }
  }

  VideoMeta meta;
  meta.frame_count = static_cast<int>(entries.size());
  meta.width = first.width;
  meta.height = first.height;
  meta.fps = fps_hint;
  meta.source_id = path.string();
  return FrameSource(path, std::move(meta), std::move(entries));
}

}  // namespace kite
