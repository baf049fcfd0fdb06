#include <fmt/format.h>
#include <gtest/gtest.h>

#include "kite/codec.hpp"
#include "kite/ingest.hpp"
#include "support.hpp"
#include "test_util.hpp"

using namespace kite;
using kite::testing::TempDir;
using kite::testing::write_text;

namespace {

void write_frames(const std::filesystem::path& dir, int n, int w = 8, int h = 6) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < n; ++i) {
    RgbImage img(w, h, Rgb{static_cast<std::uint8_t>(i), 0, 0});
    write_file_bytes(dir / fmt::format("{:06d}.png", i), encode_png(img));
  }
}

}  // namespace

TEST(Ingest, DirectoryOf120Frames) {
  TempDir tmp;
  write_frames(tmp.path(), 120);
  const FrameSource src = open_frame_source(tmp.path(), 30.0);
  EXPECT_EQ(src.meta().frame_count, 120);
  EXPECT_DOUBLE_EQ(src.meta().fps, 30.0);
  EXPECT_EQ(src.meta().width, 8);
  EXPECT_EQ(src.meta().height, 6);
}

TEST(Ingest, TimestampsFromFps) {
  TempDir tmp;
  write_frames(tmp.path(), 20);
  const FrameSource src = open_frame_source(tmp.path(), 30.0);
  EXPECT_DOUBLE_EQ(read_frame(src, 0).timestamp, 0.0);
  EXPECT_DOUBLE_EQ(read_frame(src, 15).timestamp, 0.5);
  EXPECT_EQ(read_frame(src, 7).pixels.at(0, 0).r, 7);
  EXPECT_KITE_ERROR(read_frame(src, -1), ErrorCode::kIndexOutOfRange);
  EXPECT_KITE_ERROR(read_frame(src, 20), ErrorCode::kIndexOutOfRange);
}

TEST(Ingest, NumericOrderAndIgnoredFiles) {
  TempDir tmp;
  for (int i : {10, 2, 1}) {
    write_file_bytes(tmp / fmt::format("{}.png", i),
                     encode_png(RgbImage(4, 4, Rgb{static_cast<std::uint8_t>(i), 0, 0})));
  }
  write_text(tmp / "notes.txt", "x");
  write_text(tmp / "frame_a.png", "not a frame");
  const FrameSource src = open_frame_source(tmp.path(), 10.0);
  ASSERT_EQ(src.meta().frame_count, 3);
  EXPECT_EQ(read_frame(src, 0).pixels.at(0, 0).r, 1);
  EXPECT_EQ(read_frame(src, 1).pixels.at(0, 0).r, 2);
  EXPECT_EQ(read_frame(src, 2).pixels.at(0, 0).r, 10);
}

TEST(Ingest, EmptyDirectory) {
  TempDir tmp;
  EXPECT_KITE_ERROR(open_frame_source(tmp.path(), 30.0), ErrorCode::kEmptySource);
}

TEST(Ingest, MissingPathAndBadFps) {
  TempDir tmp;
  write_frames(tmp.path(), 2);
  EXPECT_KITE_ERROR(open_frame_source(tmp.path(), 0.0), ErrorCode::kInvalidArgument);
  EXPECT_THROW(open_frame_source(tmp / "nope", 30.0), Error);
}

TEST(Ingest, DimensionMismatch) {
  TempDir tmp;
  write_frames(tmp.path(), 2);
  write_file_bytes(tmp / "000002.png", encode_png(RgbImage(9, 6)));
  EXPECT_KITE_ERROR(open_frame_source(tmp.path(), 30.0), ErrorCode::kDimMismatch);
}

TEST(Ingest, ManifestTimestampsPassThrough) {
  TempDir tmp;
  write_frames(tmp / "f", 3);
  write_text(tmp / "episode.tsv",
             "# path\tseconds\nf/000000.png\t0.0\n\nf/000001.png\t0.5\nf/000002.png\t1.0\n");
  const FrameSource src = open_frame_source(tmp / "episode.tsv", 30.0);
  ASSERT_EQ(src.meta().frame_count, 3);
  EXPECT_DOUBLE_EQ(read_frame(src, 0).timestamp, 0.0);
  EXPECT_DOUBLE_EQ(read_frame(src, 1).timestamp, 0.5);
  EXPECT_DOUBLE_EQ(read_frame(src, 2).timestamp, 1.0);
}

TEST(Ingest, ManifestRejectsNonIncreasingTimestamps) {
  TempDir tmp;
  write_frames(tmp / "f", 2);
  write_text(tmp / "m.tsv", "f/000000.png\t0.5\nf/000001.png\t0.5\n");
  EXPECT_KITE_ERROR(open_frame_source(tmp / "m.tsv", 30.0), ErrorCode::kBadManifest);
  write_text(tmp / "m2.tsv", "f/000000.png\tabc\n");
  EXPECT_KITE_ERROR(open_frame_source(tmp / "m2.tsv", 30.0), ErrorCode::kBadManifest);
}
