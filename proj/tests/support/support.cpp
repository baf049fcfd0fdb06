#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <set>

#include <fmt/format.h>
#include <unistd.h>

#include "httplib.h"
#include "kite/bev.hpp"
#include "kite/contact.hpp"
#include "kite/image.hpp"
#include "kite/perception.hpp"
#include "kite/scene_graph.hpp"

namespace kite::testing {

namespace fs = std::filesystem;

fs::path fixtures_dir() { return KITE_TEST_FIXTURES_DIR; }
fs::path golden_dir() { return KITE_TEST_GOLDEN_DIR; }

bool update_goldens() {
  const char* v = std::getenv("KITE_UPDATE_GOLDENS");
  return v != nullptr && std::string(v) == "1";
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          fmt::format("kite-test-{}-{}-{}", ::getpid(), counter++,
                      std::chrono::steady_clock::now().time_since_epoch().count());
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return {bytes.begin(), bytes.end()};
}

void write_text(const fs::path& p, const std::string& text) {
  write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

std::map<std::string, fs::path> list_files(const fs::path& root) {
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) out[fs::relative(entry.path(), root).string()] = entry.path();
  }
  return out;
}

}  // namespace

std::string compare_trees(const fs::path& a, const fs::path& b) {
  const auto fa = list_files(a);
  const auto fb = list_files(b);
  for (const auto& [name, path] : fa) {
    if (!fb.contains(name)) return fmt::format("{} only in {}", name, a.string());
    if (read_file_bytes(path) != read_file_bytes(fb.at(name))) {
      return fmt::format("{} differs", name);
    }
  }
  for (const auto& [name, path] : fb) {
    if (!fa.contains(name)) return fmt::format("{} only in {}", name, b.string());
  }
  return {};
}

std::string check_golden(const std::string& name, const std::vector<std::uint8_t>& bytes) {
  const fs::path p = golden_dir() / name;
  if (update_goldens()) {
    write_file_bytes(p, bytes);
    return {};
  }
  if (!fs::exists(p)) return fmt::format("golden {} is missing", name);
  if (read_file_bytes(p) != bytes) return fmt::format("output differs from golden {}", name);
  return {};
}

std::string check_golden(const std::string& name, const std::string& text) {
  return check_golden(name, std::vector<std::uint8_t>(text.begin(), text.end()));
}

int rand_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double rand_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ScenarioSpec recall_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 17);
  ScenarioSpec spec;
  spec.duration_frames = 200;
  spec.seed = seed;
  const int k = rand_int(rng, 3, 8);
  std::vector<int> lengths;
  int used = 0;
  for (int i = 0; i < k; ++i) {
    lengths.push_back(rand_int(rng, 3, 6));
    used += lengths.back();
  }
  constexpr int kGap = 12;
  constexpr int kFirst = 2;
  const int slack = spec.duration_frames - 1 - kFirst - used - (k - 1) * kGap;
  // Random extra spacing between bursts; whatever is left trails the last one.
  std::vector<int> cuts{0, slack};
  for (int i = 0; i < k - 1; ++i) cuts.push_back(rand_int(rng, 0, slack));
  std::sort(cuts.begin(), cuts.end());
  int start = kFirst + cuts[0];
  for (int i = 0; i < k; ++i) {
    if (i > 0) start += kGap + (cuts[i] - cuts[i - 1]);
    spec.motion_bursts.emplace_back(start, start + lengths[i] - 1);
    start += lengths[i];
  }
  return spec;
}

ScenarioSpec scaling_scenario(int frames) {
  ScenarioSpec spec;
  spec.duration_frames = frames;
  spec.seed = static_cast<std::uint64_t>(frames);
  spec.actors.push_back({"gripper", true, 0.9, {{0, 150, 150, 100, 0.3}}});
  spec.actors.push_back({"cup", false, 0.9, {{0, 320, 320, 100, 0.5}}});
  if (frames >= 10) spec.motion_bursts.emplace_back(frames / 2 - 2, frames / 2 + 1);
  return spec;
}

ScenarioSpec grasp_scenario() {
  ScenarioSpec spec;
  spec.duration_frames = 60;
  spec.seed = 11;
  // Uniform grid for M = 8: 0 8 17 25 34 42 51 59.
  spec.actors.push_back({"gripper", true, 0.9,
                         {{0, 150, 150, 100, 0.3},
                          {18, 150, 150, 100, 0.3},
                          {24, 310, 310, 100, 0.4},
                          {59, 310, 310, 100, 0.4}}});
  spec.actors.push_back({"cup", false, 0.9, {{0, 320, 320, 100, 0.5}}});
  spec.actors.push_back({"bowl", false, 0.9, {{0, 420, 110, 80, 0.7}}});
  return spec;
}

ScenarioSpec drop_scenario() {
  ScenarioSpec spec;
  spec.duration_frames = 60;
  spec.seed = 12;
  spec.actors.push_back({"gripper", true, 0.9,
                         {{0, 300, 250, 100, 0.4},
                          {35, 300, 250, 100, 0.4},
                          {41, 300, 80, 100, 0.35},
                          {59, 300, 80, 100, 0.35}}});
  spec.actors.push_back({"cup", false, 0.9,
                         {{0, 300, 250, 100, 0.45},
                          {35, 300, 250, 100, 0.45},
                          {41, 300, 280, 100, 0.5},
                          {59, 300, 280, 100, 0.5}}});
  spec.failure_frame = 36;
  return spec;
}

Detection make_detection(const std::string& label, Box box, double confidence,
                         std::optional<int> id, std::optional<double> median_depth) {
  Detection d;
  d.box = box;
  d.class_label = label;
  d.confidence = confidence;
  d.instance_id = id;
  if (median_depth) d.depth_stats = DepthStats{*median_depth, *median_depth};
  return d;
}

EpisodeEvidence random_evidence(std::mt19937_64& rng, bool with_plan) {
  static const std::vector<std::string> kClasses{"cup", "bowl", "block", "drawer", "sponge"};
  EpisodeEvidence e;
  e.meta = {rand_int(rng, 20, 400), 640, 480, 30.0, "random"};
  e.robot.name = fmt::format("arm-{}", rand_int(rng, 0, 99));
  e.robot.num_arms = rand_int(rng, 1, 2);
  e.robot.num_grippers = rand_int(rng, 0, 2);
  e.robot.end_effector_types = {"parallel_gripper"};
  e.robot.sensors = {"wrist_cam", "front_cam"};
  e.robot.workspace_note = "table";
  e.robot.gripper_class_labels = {"gripper"};
  if (with_plan) {
    e.plan_steps = std::vector<std::string>{};
    for (int i = rand_int(rng, 1, 4); i > 0; --i) e.plan_steps->push_back(fmt::format("step {}", i));
  }

  const int m = rand_int(rng, 1, 8);
  std::set<int> frames;
  while (static_cast<int>(frames.size()) < m) frames.insert(rand_int(rng, 0, e.meta.frame_count - 1));
  std::vector<DetectionSet> raw;
  for (int f : frames) {
    Keyframe k;
    k.frame_index = f;
    k.timestamp = f / e.meta.fps;
    k.image = RgbImage(kKeyframeSize, kKeyframeSize, kWhite);
    k.reason = rand_int(rng, 0, 1) ? SelectionReason::kMotionPeak : SelectionReason::kUniformBackfill;
    e.keyframes.push_back(std::move(k));
    DetectionSet dets;
    const int n = rand_int(rng, 0, 5);
    for (int i = 0; i < n; ++i) {
      const double x = rand_unit(rng) * 400, y = rand_unit(rng) * 400;
      const double w = 20 + rand_unit(rng) * 90, h = 20 + rand_unit(rng) * 90;
      const std::string label = i == 0 ? "gripper" : kClasses[rand_int(rng, 0, 4)];
      dets.push_back(make_detection(label, {x, y, x + w, y + h}, rand_unit(rng), std::nullopt,
                                    rand_unit(rng)));
    }
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
      return a.confidence > b.confidence;
    });
    raw.push_back(std::move(dets));
  }
  TrackingResult tracked = link_tracks(std::move(raw));
  e.contacts = episode_contacts(tracked.detections, e.robot);
  for (std::size_t k = 0; k < tracked.detections.size(); ++k) {
    e.local_graphs.push_back(build_local_graph(tracked.detections[k], static_cast<int>(k)));
  }
  e.global_graph = aggregate_global(e.local_graphs, tracked.tracks);
  e.detections = std::move(tracked.detections);
  e.tracks = std::move(tracked.tracks);
  return e;
}

EpisodeEvidence fixture_evidence() {
  EpisodeEvidence e;
  e.meta = {90, 640, 480, 30.0, "fixture"};
  e.robot = {"franka-panda", 1, 1, {"parallel_gripper"}, {"front_rgb", "wrist_rgb"},
             "tabletop with a mug and a tray", "", {"gripper"}};
  e.plan_steps = std::vector<std::string>{"reach the mug", "grasp the mug", "place it on the tray"};
  for (auto [frame, t] : {std::pair{12, 0.4}, std::pair{45, 1.5}}) {
    Keyframe k;
    k.frame_index = frame;
    k.timestamp = t;
    k.image = RgbImage(kKeyframeSize, kKeyframeSize, kWhite);
    k.reason = SelectionReason::kMotionPeak;
    e.keyframes.push_back(std::move(k));
  }
  e.detections = {
      {make_detection("gripper", {100, 100, 180, 180}, 0.91, 1, 0.30),
       make_detection("mug", {300, 110, 380, 190}, 0.82, 2, 0.32)},
      {make_detection("gripper", {290, 105, 370, 185}, 0.88, 1, 0.31),
       make_detection("mug", {300, 110, 380, 190}, 0.80, 2, 0.33)},
  };
  e.tracks = {{1, "gripper", {{0, 0}, {1, 0}}}, {2, "mug", {{0, 1}, {1, 1}}}};
  const double d0 = normalized_center_distance(e.detections[0][0].box, e.detections[0][1].box);
  const double d1 = normalized_center_distance(e.detections[1][0].box, e.detections[1][1].box);
  const double iou1 = iou(e.detections[1][0].box, e.detections[1][1].box);
  e.contacts = {{0, 1, ContactLabel::kGain, iou1, d1 - d0, ContactFlag::kNone}};
  e.local_graphs = {build_local_graph(e.detections[0], 0), build_local_graph(e.detections[1], 1)};
  e.global_graph = aggregate_global(e.local_graphs, e.tracks);
  return e;
}

PngBytes fixture_storyboard() {
  const EpisodeEvidence e = fixture_evidence();
  std::vector<RgbImage> overlays;
  std::vector<RgbImage> bevs;
  for (std::size_t k = 0; k < e.keyframes.size(); ++k) {
    const int ordinal = static_cast<int>(k);
    overlays.push_back(overlay_keyframe(e.keyframes[k], e.detections[k], ordinal));
    bevs.push_back(render_bev_image(e.local_graphs[k], e.keyframes[k].timestamp, ordinal));
  }
  return render_storyboard(overlays, bevs);
}

SceneGraph fixture_graph(int which) {
  SceneGraph g;
  g.keyframe_ordinal = which;
  auto node = [](int id, std::string label, double cx, double cy, double z, double s) {
    SceneNode n;
    n.instance_id = id;
    n.class_label = std::move(label);
    n.pixel_cx = cx;
    n.pixel_cy = cy;
    n.centroid = {(cx - 256) / 512 * (z + 0.1), (cy - 256) / 512 * (z + 0.1), z};
    n.confidence = s;
    return n;
  };
  switch (which) {
    case 0:
      g.nodes = {node(1, "gripper", 140, 120, 0.25, 0.95), node(2, "mug", 330, 300, 0.55, 0.7),
                 node(3, "tray", 420, 380, 0.85, 0.4)};
      break;
    case 1:
      g.nodes = {node(1, "gripper", 300, 200, 0.5, 1.0), node(2, "mug", 310, 210, 0.52, 0.2),
                 node(4, "sponge", 40, 470, 0.05, 0.6)};
      break;
    default:
      g.nodes = {node(2, "mug", 0, 256, 0.0, 0.5), node(5, "drawer", 512, 100, 1.0, 0.99),
                 node(7, "block", 256, 256, 0.5, 0.33)};
      break;
  }
  return g;
}

std::vector<LocalizationCase> localization_cases() {
  const std::string strict =
      R"({"candidates":[{"frame_num":4,"confidence":0.9},{"frame_num":2,"confidence":0.4}]})";
  const std::vector<std::pair<int, double>> strict_result{{4, 0.9}, {2, 0.4}};
  std::vector<LocalizationCase> cases;
  cases.push_back({"strict json", strict, {2, 4}, strict_result, {}, {}, false});
  cases.push_back({"fenced with prose",
                   "The gripper slips here.\n```json\n" + strict + "\n```\nLet me know if more is needed.",
                   {2, 4}, strict_result, {}, {}, false});
  cases.push_back({"prose wrapped", "My answer: " + strict + " (based on the contact tokens).", {2, 4},
                   strict_result, {}, {}, false});
  cases.push_back({"clamped",
                   R"({"candidates":[{"frame_num":4,"confidence":1.4},{"frame_num":2,"confidence":-0.3}]})",
                   {2, 4}, {{4, 1.0}, {2, 0.0}}, {}, {}, true});
  cases.push_back({"more than three",
                   R"({"candidates":[{"frame_num":1,"confidence":0.1},{"frame_num":2,"confidence":0.5},)"
                   R"({"frame_num":3,"confidence":0.3},{"frame_num":4,"confidence":0.8},)"
                   R"({"frame_num":5,"confidence":0.2}]})",
                   {1, 2, 3, 4, 5}, {{4, 0.8}, {2, 0.5}, {3, 0.3}}, {}, {}, false});
  cases.push_back({"invalid frame dropped",
                   R"({"candidates":[{"frame_num":99,"confidence":0.95},{"frame_num":2,"confidence":0.4}]})",
                   {2, 4}, {{2, 0.4}}, {}, {99}, false});
  cases.push_back({"tie goes to earlier frame",
                   R"({"candidates":[{"frame_num":7,"confidence":0.5},{"frame_num":3,"confidence":0.5}]})",
                   {3, 7}, {{3, 0.5}, {7, 0.5}}, {}, {}, false});
  cases.push_back({"duplicate frame",
                   R"({"candidates":[{"frame_num":4,"confidence":0.3},{"frame_num":4,"confidence":0.7}]})",
                   {4}, {{4, 0.7}}, {}, {}, false});
  cases.push_back({"empty candidate list", R"({"candidates":[]})", {0, 1}, {}, {}, {}, false});
  cases.push_back({"no json", "I think the failure happens around frame 12.", {12}, {},
                   ErrorCode::kNoJsonFound, {}, false});
  cases.push_back({"wrong field names", R"({"candidates":[{"frame":4,"conf":0.9}]})", {4}, {},
                   ErrorCode::kSchemaViolation, {}, false});
  cases.push_back({"string frame number", R"({"candidates":[{"frame_num":"4","confidence":0.9}]})",
                   {4}, {}, ErrorCode::kSchemaViolation, {}, false});
  return cases;
}

TestServer::TestServer(const Setup& setup) : server_(std::make_unique<httplib::Server>()) {
  setup(*server_);
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

TestServer::~TestServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string TestServer::url() const { return fmt::format("http://127.0.0.1:{}", port_); }

}  // namespace kite::testing
