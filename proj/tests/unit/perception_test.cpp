#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "kite/codec.hpp"
#include "kite/perception.hpp"
#include "support.hpp"
#include "test_util.hpp"

using namespace kite;
using kite::testing::TempDir;
using kite::testing::fixtures_dir;
using kite::testing::read_text;

namespace {

Keyframe keyframe(int index = 0) {
  Keyframe k;
  k.frame_index = index;
  k.image = RgbImage(kKeyframeSize, kKeyframeSize, kWhite);
  return k;
}

// Independent nearest-rank quantile.
double brute_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  std::size_t rank = 1;
  while (static_cast<double>(rank) < q * static_cast<double>(v.size()) - 1e-9) ++rank;
  return v[rank - 1];
}

}  // namespace

TEST(Detect, CapsAtFiveMostConfident) {
  MockDetectionBackend mock;
  std::vector<RawDetection> raw;
  for (int i = 0; i < 7; ++i) raw.push_back({{0, 0, 10.0 + i, 10}, "cup", 0.1 * (i + 1)});
  mock.script(0, raw);
  const DetectionSet out = detect(mock, {}, keyframe());
  ASSERT_EQ(out.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(out[i].confidence, 0.1 * (7 - i), 1e-12);
  EXPECT_EQ(mock.calls(), 1);
}

TEST(Detect, ClipsBoxes) {
  const DetectionSet out = postprocess_detections({{{-10, 0, 300, 520}, "cup", 0.9}}, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].box, (Box{0, 0, 300, 512}));
}

TEST(Detect, ReordersAndDropsDegenerate) {
  const DetectionSet out = postprocess_detections(
      {{{50, 60, 10, 20}, "cup", 0.5}, {{5, 5, 5, 40}, "cup", 0.9}, {{600, 0, 700, 10}, "cup", 0.8}},
      {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].box, (Box{10, 20, 50, 60}));
}

TEST(Detect, VocabularyFilterAndStableOrder) {
  const std::vector<std::string> vocab{"cup"};
  const DetectionSet out = postprocess_detections(
      {{{0, 0, 10, 10}, "cup", 0.5}, {{0, 0, 20, 20}, "fork", 0.9}, {{0, 0, 30, 30}, "cup", 0.5}},
      vocab);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].box.x_max, 10);
  EXPECT_DOUBLE_EQ(out[1].box.x_max, 30);
}

TEST(Detect, RequiresKeyframeSize) {
  MockDetectionBackend mock;
  Keyframe k = keyframe();
  k.image = RgbImage(64, 64);
  EXPECT_KITE_ERROR(detect(mock, {}, k), ErrorCode::kInvalidArgument);
}

TEST(Depth, NearestRankQuantileOneToTen) {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  EXPECT_DOUBLE_EQ(nearest_rank_quantile(v, 0.8), 8.0);
  DepthRaster r(10, 1);
  r.values = v;
  const DepthRaster n = normalize_depth(r, 0.8);
  EXPECT_DOUBLE_EQ(n.values[0], 0.0);
  EXPECT_DOUBLE_EQ(n.values[7], 1.0);
  EXPECT_DOUBLE_EQ(n.values[8], 1.0);
  EXPECT_DOUBLE_EQ(n.values[9], 1.0);
  EXPECT_DOUBLE_EQ(n.values[3], 3.0 / 7.0);
}

TEST(Depth, ConstantRasterIsHalf) {
  const DepthRaster n = normalize_depth(DepthRaster(4, 4, 4.2), 0.8);
  for (double v : n.values) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Depth, TwoValueRasterMatchesOracle) {
  DepthRaster r(2, 1);
  r.values = {0, 100};
  EXPECT_DOUBLE_EQ(nearest_rank_quantile(r.values, 0.8), brute_quantile(r.values, 0.8));
  const DepthRaster n = normalize_depth(r, 0.8);
  EXPECT_DOUBLE_EQ(n.values[0], 0.0);
  EXPECT_DOUBLE_EQ(n.values[1], 1.0);
}

TEST(Depth, QuantileMatchesOracleOnRandomData) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(kite::testing::rand_int(rng, 1, 60));
    for (double& x : v) x = kite::testing::rand_int(rng, 0, 20);
    const double q = kite::testing::rand_int(rng, 1, 100) / 100.0;
    ASSERT_DOUBLE_EQ(nearest_rank_quantile(v, q), brute_quantile(v, q));
  }
}

TEST(Depth, ResamplesToKeyframeSize) {
  MockDepthBackend mock([](const Keyframe&) {
    DepthRaster r(2, 2);
    r.values = {0, 1, 2, 3};
    return r;
  });
  const DepthRaster d = estimate_depth(mock, keyframe(), 1.0);
  ASSERT_EQ(d.width, kKeyframeSize);
  ASSERT_EQ(d.height, kKeyframeSize);
  EXPECT_DOUBLE_EQ(d.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(d.at(511, 511), 1.0);
  EXPECT_DOUBLE_EQ(d.at(300, 10), 1.0 / 3.0);
  EXPECT_EQ(mock.calls(), 1);
}

TEST(Depth, DefaultMockIsVerticalRamp) {
  MockDepthBackend mock;
  const DepthRaster d = estimate_depth(mock, keyframe(), 1.0);
  EXPECT_GT(d.at(10, 0), d.at(10, 511));
}

TEST(DepthStats, ConstantRegion) {
  const DepthStats s = depth_stats_in_box(DepthRaster(512, 512, 0.3), {10, 10, 50, 40});
  EXPECT_DOUBLE_EQ(s.median_rel_depth, 0.3);
  EXPECT_NEAR(s.mean_rel_depth, 0.3, 1e-12);
}

TEST(DepthStats, HalfAndHalf) {
  DepthRaster r(512, 512, 0.2);
  for (int y = 0; y < 512; ++y) {
    for (int x = 20; x < 40; ++x) r.at(x, y) = 0.8;
  }
  const DepthStats s = depth_stats_in_box(r, {0, 0, 40, 10});
  EXPECT_NEAR(s.mean_rel_depth, 0.5, 1e-12);
  EXPECT_NEAR(s.median_rel_depth, 0.5, 1e-12);
}

TEST(DepthStats, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  DepthRaster r(512, 512);
  for (double& v : r.values) v = kite::testing::rand_unit(rng);
  for (int trial = 0; trial < 50; ++trial) {
    const double x0 = kite::testing::rand_unit(rng) * 400, y0 = kite::testing::rand_unit(rng) * 400;
    const Box b{x0, y0, x0 + 1 + kite::testing::rand_unit(rng) * 100,
                y0 + 1 + kite::testing::rand_unit(rng) * 100};
    std::vector<double> px;
    for (int y = static_cast<int>(std::floor(b.y_min)); y < static_cast<int>(std::ceil(b.y_max)); ++y) {
      for (int x = static_cast<int>(std::floor(b.x_min)); x < static_cast<int>(std::ceil(b.x_max)); ++x) {
        px.push_back(r.at(x, y));
      }
    }
    double sum = 0;
    for (double v : px) sum += v;
    std::sort(px.begin(), px.end());
    const std::size_t n = px.size();
    const double median = n % 2 ? px[n / 2] : (px[n / 2 - 1] + px[n / 2]) / 2;
    const DepthStats s = depth_stats_in_box(r, b);
    ASSERT_NEAR(s.mean_rel_depth, sum / n, 1e-9);
    ASSERT_DOUBLE_EQ(s.median_rel_depth, median);
  }
}

TEST(DepthStats, AttachFillsEveryDetection) {
  DetectionSet dets(2);
  dets[0].box = {0, 0, 10, 10};
  dets[1].box = {100, 100, 120, 130};
  for (const Detection& d : attach_depth_stats(dets, DepthRaster(512, 512, 0.7))) {
    ASSERT_TRUE(d.depth_stats);
    EXPECT_DOUBLE_EQ(d.depth_stats->median_rel_depth, 0.7);
  }
}

TEST(Wire, ResponseFixtures) {
  const auto dir = fixtures_dir() / "wire";
  const auto valid = parse_detection_response(read_text(dir / "detect_response_valid.json"));
  ASSERT_EQ(valid.size(), 2u);
  EXPECT_EQ(valid[0].label, "cup");
  EXPECT_DOUBLE_EQ(valid[0].box[3], 200.25);
  EXPECT_DOUBLE_EQ(valid[1].score, 0.41);
  EXPECT_TRUE(parse_detection_response(read_text(dir / "detect_response_empty.json")).empty());
  for (const char* bad : {"detect_response_bad_score.json", "detect_response_bad_box.json",
                          "detect_response_missing_label.json"}) {
    EXPECT_KITE_ERROR(parse_detection_response(read_text(dir / bad)), ErrorCode::kBackendMalformed);
  }
  EXPECT_KITE_ERROR(parse_detection_response("not json"), ErrorCode::kBackendMalformed);
}

TEST(Wire, ResponseRoundTrip) {
  const std::vector<RawDetection> dets{{{1.5, 2, 3, 4}, "cup", 0.25}, {{0, 0, 9, 9}, "bowl", 1.0}};
  const auto back = parse_detection_response(detection_response_json(dets));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].box, dets[0].box);
  EXPECT_EQ(back[1].label, "bowl");
}

TEST(Backends, MockScriptFile) {
  TempDir tmp;
  kite::testing::write_text(
      tmp / "script.json",
      R"({"default": {"detections": [{"box": [0,0,5,5], "label": "cup", "score": 0.5}]},
          "frames": {"3": {"detections": []}}})");
  auto mock = MockDetectionBackend::from_script_file(tmp / "script.json");
  EXPECT_EQ(mock->detect(keyframe(0), {}, 5).size(), 1u);
  EXPECT_TRUE(mock->detect(keyframe(3), {}, 5).empty());
  EXPECT_EQ(mock->calls(), 2);
}

TEST(Backends, DirectoryRecords) {
  TempDir tmp;
  kite::testing::write_text(tmp / "4.det.json",
                            R"({"detections": [{"box": [1,2,3,4], "label": "cup", "score": 0.9}]})");
  Gray16Raster g(3, 1);
  g.values = {0, 65535, 32768};
  write_file_bytes(tmp / "4.depth.png", encode_png_gray16(g));
  DirectoryDetectionBackend det(tmp.path());
  DirectoryDepthBackend depth(tmp.path());
  EXPECT_EQ(det.detect(keyframe(4), {}, 5).size(), 1u);
  const DepthRaster d = depth.estimate(keyframe(4));
  ASSERT_EQ(d.width, 3);
  EXPECT_DOUBLE_EQ(d.values[1], 1.0);
  EXPECT_KITE_ERROR(det.detect(keyframe(5), {}, 5), ErrorCode::kMissingRecord);
  EXPECT_KITE_ERROR(depth.estimate(keyframe(5)), ErrorCode::kMissingRecord);
}

TEST(Backends, Factories) {
  DetectionBackendRef ref;
  ref.kind = BackendKind::kHttp;
  ref.endpoint_or_path = "http://127.0.0.1:1";
  EXPECT_KITE_ERROR(make_detection_backend(ref), ErrorCode::kInvalidArgument);
  DepthBackendRef depth;
  depth.clamp_quantile = 0.0;
  EXPECT_KITE_ERROR(make_depth_backend(depth), ErrorCode::kInvalidArgument);
}

TEST(Perceive, ParallelEqualsSequentialAndCountsCalls) {
  std::vector<Keyframe> kfs;
  for (int i = 0; i < 6; ++i) kfs.push_back(keyframe(i * 10));
  MockDetectionBackend det;
  for (int i = 0; i < 6; ++i) {
    det.script(i * 10, {{{10.0 * i, 0, 10.0 * i + 50, 60}, "cup", 0.5 + 0.05 * i}});
  }
  MockDepthBackend depth;
  const PerceptionOutput par = perceive_keyframes(kfs, det, depth, {}, 0.8, 4);
  const PerceptionOutput seq = perceive_keyframes(kfs, det, depth, {}, 0.8, 1);
  EXPECT_EQ(par.detections, seq.detections);
  EXPECT_EQ(det.calls(), 12);
  EXPECT_EQ(depth.calls(), 12);
  ASSERT_TRUE(par.detections[2][0].depth_stats);
}

TEST(Perceive, FirstFailureIsRethrown) {
  std::vector<Keyframe> kfs{keyframe(0), keyframe(1)};
  TempDir tmp;
  DirectoryDetectionBackend det(tmp.path());
  MockDepthBackend depth;
  EXPECT_KITE_ERROR(perceive_keyframes(kfs, det, depth, {}, 0.8, 2), ErrorCode::kMissingRecord);
}
