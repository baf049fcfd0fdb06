#include <string>

#include <gtest/gtest.h>

#include "kite/bev.hpp"
#include "kite/codec.hpp"
#include "kite/draw.hpp"
#include "kite/image.hpp"
#include "support.hpp"
#include "test_util.hpp"

using namespace kite;
using kite::testing::check_golden;
using kite::testing::make_detection;

namespace {

SceneNode node(int id, double cx, double z, double s) {
  SceneNode n;
  n.instance_id = id;
  n.class_label = "obj";
  n.pixel_cx = cx;
  n.pixel_cy = 256;
  n.centroid = {0, 0, z};
  n.confidence = s;
  return n;
}

}  // namespace

TEST(Radius, Examples) {
  EXPECT_EQ(radius_for_confidence(1.0), 10);
  EXPECT_EQ(radius_for_confidence(0.0), 3);
  EXPECT_EQ(radius_for_confidence(0.5), 5);
  EXPECT_EQ(radius_for_confidence(0.2), 3);
  EXPECT_KITE_ERROR(radius_for_confidence(1.2), ErrorCode::kConfidenceRange);
  EXPECT_KITE_ERROR(radius_for_confidence(-0.1), ErrorCode::kConfidenceRange);
}

TEST(Radius, MonotoneAndBounded) {
  int prev = 0;
  for (int i = 0; i <= 1000; ++i) {
    const int r = radius_for_confidence(i / 1000.0);
    EXPECT_GE(r, prev);
    EXPECT_GE(r, 3);
    EXPECT_LE(r, 10);
    prev = r;
  }
}

TEST(Projection, Examples) {
  EXPECT_EQ(project_to_canvas(256, 0.5), (CanvasPoint{128, 128}));
  EXPECT_EQ(project_to_canvas(0, 0), (CanvasPoint{24, 231}));
  EXPECT_EQ(project_to_canvas(512, 1), (CanvasPoint{231, 24}));
}

TEST(Projection, StaysOnCanvas) {
  for (int cx = 0; cx <= 512; cx += 7) {
    for (int zi = 0; zi <= 20; ++zi) {
      const CanvasPoint p = project_to_canvas(cx, zi / 20.0);
      EXPECT_GE(p.u, 24);
      EXPECT_LE(p.u, 231);
      EXPECT_GE(p.v, 24);
      EXPECT_LE(p.v, 231);
    }
  }
}

TEST(BevParams, Validation) {
  EXPECT_KITE_ERROR(validate(BevSpec{256, 10, 3, 24}), ErrorCode::kInvalidArgument);
  EXPECT_KITE_ERROR(validate(BevSpec{40, 3, 10, 20}), ErrorCode::kInvalidArgument);
}

TEST(BevRender, SingleNodeCircle) {
  SceneGraph g;
  g.nodes = {node(1, 256, 0.5, 1.0)};
  const RgbImage img = render_bev_image(g, 0.0, 0);
  ASSERT_EQ(img.width(), 256);
  ASSERT_EQ(img.height(), 256);
  const Rgb c = palette_color(1);
  EXPECT_EQ(img.at(128, 128), c);
  EXPECT_EQ(img.at(118, 128), c);
  EXPECT_EQ(img.at(128, 138), c);
  EXPECT_EQ(img.at(128, 139), kWhite);
  EXPECT_EQ(img.at(117, 128), kWhite);
}

TEST(BevRender, EmptyGraphHasOnlyAxesAndCaption) {
  const RgbImage img = render_bev_image(SceneGraph{}, 1.25, 2);
  for (int y = 40; y < 220; ++y) {
    for (int x = 40; x < 220; ++x) ASSERT_EQ(img.at(x, y), kWhite) << x << "," << y;
  }
  EXPECT_NE(img.at(12, 100), kWhite);   // Z axis
  EXPECT_NE(img.at(100, 243), kWhite);  // X axis
}

TEST(BevRender, DeterministicAndGolden) {
  for (int i = 0; i < 3; ++i) {
    const SceneGraph g = kite::testing::fixture_graph(i);
    const PngBytes a = render_bev(g, 0.5 * i + 0.25, i);
    EXPECT_EQ(a, render_bev(g, 0.5 * i + 0.25, i));
    EXPECT_EQ(check_golden("bev_fixture_" + std::to_string(i) + ".png", a), "");
  }
}

TEST(Storyboard, Layout) {
  const RgbImage rgb(512, 512, Rgb{10, 20, 30});
  const RgbImage bev(256, 256, kWhite);
  std::vector<RgbImage> overlays(8, rgb);
  std::vector<RgbImage> bevs(8, bev);
  const RgbImage board = render_storyboard_image(overlays, bevs);
  EXPECT_EQ(board.width(), 8 * 256);
  EXPECT_EQ(board.height(), 512);
  EXPECT_EQ(board.at(100, 100), (Rgb{10, 20, 30}));
  EXPECT_EQ(board.at(100, 400), kWhite);

  const RgbImage one = render_storyboard_image(std::span(overlays).first(1), std::span(bevs).first(1));
  EXPECT_EQ(one.width(), 256);
  EXPECT_EQ(one.height(), 512);

  EXPECT_KITE_ERROR(render_storyboard_image(overlays, std::span(bevs).first(3)), ErrorCode::kCountMismatch);
  EXPECT_EQ(render_filmstrip_image(overlays).height(), 256);
}

TEST(Storyboard, Golden) {
  const PngBytes a = kite::testing::fixture_storyboard();
  EXPECT_EQ(a, kite::testing::fixture_storyboard());
  EXPECT_EQ(check_golden("storyboard_fixture.png", a), "");
}

TEST(Overlay, TimestampOnlyAndDeterministic) {
  Keyframe kf;
  kf.frame_index = 7;
  kf.timestamp = 0.7;
  kf.image = RgbImage(512, 512, kWhite);
  const RgbImage bare = overlay_keyframe(kf, {}, 0);
  EXPECT_NE(bare.at(2, 2), kWhite);
  EXPECT_EQ(bare.at(300, 300), kWhite);

  const DetectionSet dets{make_detection("cup", {200, 200, 300, 300}, 0.77, 3)};
  const RgbImage a = overlay_keyframe(kf, dets, 0);
  EXPECT_EQ(a, overlay_keyframe(kf, dets, 0));
  EXPECT_EQ(a.at(250, 200), palette_color(3));
  EXPECT_EQ(a.at(250, 250), kWhite);
  EXPECT_EQ(palette_color(3), palette_color(13));
}
