#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "kite/bev.hpp"
#include "kite/codec.hpp"
#include "kite/saliency.hpp"
#include "kite/scene_graph.hpp"
#include "kite/serializer.hpp"
#include "kite/synthetic.hpp"

namespace {

kite::ScenarioSpec moving_scene(int size) {
  kite::ScenarioSpec spec;
  spec.duration_frames = 2;
  spec.width = size;
  spec.height = size;
  spec.seed = 3;
  spec.actors.push_back({"gripper", true, 0.9, {{0, 150, 150, 100, 0.3}, {1, 170, 160, 100, 0.3}}});
  return spec;
}

kite::SceneGraph graph_with(int nodes) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  kite::SceneGraph g;
  for (int i = 0; i < nodes; ++i) {
    kite::SceneNode n;
    n.instance_id = i + 1;
    n.class_label = "obj";
    n.pixel_cx = 512 * u(rng);
    n.pixel_cy = 512 * u(rng);
    n.centroid = {u(rng) - 0.5, u(rng) - 0.5, u(rng)};
    n.confidence = u(rng);
    g.nodes.push_back(n);
  }
  return g;
}

void BM_Flow(benchmark::State& state) {
  const auto spec = moving_scene(static_cast<int>(state.range(0)));
  const kite::RgbImage a = kite::render_scenario_frame(spec, 0);
  const kite::RgbImage b = kite::render_scenario_frame(spec, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kite::mean_flow_magnitude(kite::compute_flow(a, b, kite::KeyframeSelectionParams{})));
  }
}
BENCHMARK(BM_Flow)->Arg(128)->Arg(256)->Arg(512);

void BM_SelectKeyframes(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  kite::SaliencyCurve curve;
  curve.frame_count = static_cast<int>(state.range(0));
  for (int i = 0; i + 1 < curve.frame_count; ++i) curve.scores.push_back(u(rng));
  const kite::KeyframeSelectionParams params;
  for (auto _ : state) benchmark::DoNotOptimize(kite::select_keyframes(curve, params));
}
BENCHMARK(BM_SelectKeyframes)->Arg(200)->Arg(10000);

void BM_RenderBev(benchmark::State& state) {
  const kite::SceneGraph g = graph_with(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kite::render_bev(g, 1.25, 3));
}
BENCHMARK(BM_RenderBev)->Arg(3)->Arg(5);

void BM_EncodePng(benchmark::State& state) {
  const kite::RgbImage img = kite::render_scenario_frame(moving_scene(512), 0);
  for (auto _ : state) benchmark::DoNotOptimize(kite::encode_png(img));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * img.bytes().size());
}
BENCHMARK(BM_EncodePng);

void BM_Serialize(benchmark::State& state) {
  kite::EpisodeEvidence e;
  e.meta = {static_cast<int>(state.range(0)) * 10, 640, 480, 10.0, "bench"};
  e.robot.name = "arm";
  e.robot.num_grippers = 1;
  e.robot.gripper_class_labels = {"gripper"};
  const int m = static_cast<int>(state.range(0));
  for (int k = 0; k < m; ++k) {
    kite::Keyframe kf;
    kf.frame_index = k * 10;
    kf.timestamp = k;
    kf.image = kite::RgbImage(kite::kKeyframeSize, kite::kKeyframeSize, kite::kWhite);
    e.keyframes.push_back(kf);
    kite::SceneGraph g = graph_with(5);
    g.keyframe_ordinal = k;
    kite::DetectionSet dets;
    for (const kite::SceneNode& n : g.nodes) {
      dets.push_back({{n.pixel_cx - 5, n.pixel_cy - 5, n.pixel_cx + 5, n.pixel_cy + 5},
                      n.instance_id == 1 ? "gripper" : "obj", n.confidence, n.instance_id,
                      kite::DepthStats{n.centroid.z, n.centroid.z}});
    }
    e.detections.push_back(dets);
    e.local_graphs.push_back(kite::build_local_graph(dets, k));
    if (k > 0) e.contacts.push_back({k - 1, k});
  }
  for (int id = 1; id <= 5; ++id) {
    kite::Track t{id, id == 1 ? "gripper" : "obj", {}};
    for (int k = 0; k < m; ++k) t.observations[k] = static_cast<std::size_t>(id - 1);
    e.tracks.push_back(t);
  }
  e.global_graph = kite::aggregate_global(e.local_graphs, e.tracks);
  kite::ValidationOptions options;
  options.budget = m;
  for (auto _ : state) benchmark::DoNotOptimize(kite::serialize_context(e, options));
}
BENCHMARK(BM_Serialize)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
