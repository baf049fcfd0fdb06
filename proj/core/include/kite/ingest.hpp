#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kite/model.hpp"

namespace kite {

struct FrameEntry {
  std::filesystem::path path;
  std::optional<double> timestamp;  // from a manifest; otherwise index / fps
};

/// An episode on disk: either a directory of numerically named PNG/JPEG
/// frames (000001.png, ...) or a TSV manifest of `path<TAB>seconds` lines.
/// Read-only after open; read_frame may be called concurrently.
class FrameSource {
 public:
  FrameSource(std::filesystem::path root, VideoMeta meta, std::vector<FrameEntry> entries);

  const std::filesystem::path& root() const noexcept { return root_; }
  const VideoMeta& meta() const noexcept { return meta_; }
  std::span<const FrameEntry> entries() const noexcept { return entries_; }

  double timestamp(long index) const;
  Frame read_frame(long index) const;

 private:
  std::filesystem::path root_;
  VideoMeta meta_;
  std::vector<FrameEntry> entries_;
};

/// Errors: kEmptySource, kDimMismatch, kBadManifest, kInvalidArgument (fps_hint <= 0).
FrameSource open_frame_source(const std::filesystem::path& path, double fps_hint);

/// Errors: kIndexOutOfRange, kDecodeFailure.
inline Frame read_frame(const FrameSource& src, long index) { return src.read_frame(index); }

}  // namespace kite
