#include "kite/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "kite/codec.hpp"
#include "kite/error.hpp"

namespace kite {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "synthetic-oracle";
constexpr double kCanvas = 512.0;

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCode::kInvalidSpec, kModule, msg);
}

// Raw engine output only; std distributions differ between standard libraries.
class Noise {
 public:
  explicit Noise(std::uint64_t seed) : engine_(seed) {}
  std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() >> 56); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  return seed ^ (0x9E3779B97F4A7C15ull * (tag + 1));
}

// Bilinearly interpolated value noise with cells of `cell` pixels.
std::vector<double> value_noise(int w, int h, int cell, Noise& rng) {
  const int gw = w / cell + 2;
  const int gh = h / cell + 2;
  std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
  for (double& v : grid) v = rng.byte();
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const int gy = y / cell;
    const double fy = static_cast<double>(y % cell) / cell;
    for (int x = 0; x < w; ++x) {
      const int gx = x / cell;
      const double fx = static_cast<double>(x % cell) / cell;
      auto g = [&](int ix, int iy) { return grid[static_cast<std::size_t>(iy) * gw + ix]; };
      const double top = g(gx, gy) * (1 - fx) + g(gx + 1, gy) * fx;
      const double bottom = g(gx, gy + 1) * (1 - fx) + g(gx + 1, gy + 1) * fx;
      out[static_cast<std::size_t>(y) * w + x] = top * (1 - fy) + bottom * fy;
    }
  }
  return out;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

RgbImage background(const ScenarioSpec& spec) {
  Noise rng(substream(spec.seed, 0));
  const int w = spec.width;
  const int h = spec.height;
  const auto coarse = value_noise(w, h, 8, rng);
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = coarse[static_cast<std::size_t>(y) * w + x] * 0.75 + rng.byte() * 0.25;
      img.set(x, y, {to_byte(v), to_byte(v * 0.9 + 12), to_byte(v * 0.8 + 24)});
    }
  }
  return img;
}

struct BurstPatch {
  RgbImage texture;
  double x0 = 0, y0 = 0;  // resting position before the burst
  double dx = 0, dy = 0;  // total displacement
  std::vector<double> progress;  // cumulative fraction after each burst frame
};

std::vector<BurstPatch> burst_patches(const ScenarioSpec& spec) {
  std::vector<BurstPatch> out;
  const int side = std::max(8, std::min(spec.width, spec.height) / 5);
  const double travel = 0.15 * std::min(spec.width, spec.height);
  for (std::size_t b = 0; b < spec.motion_bursts.size(); ++b) {
    Noise rng(substream(spec.seed, 100 + b));
    BurstPatch p;
    p.texture = RgbImage(side, side);
    const auto noise_r = value_noise(side, side, 3, rng);
    const auto noise_g = value_noise(side, side, 3, rng);
    const auto noise_b = value_noise(side, side, 3, rng);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const auto i = static_cast<std::size_t>(y) * side + x;
        p.texture.set(x, y, {noise_r[i] > 128 ? std::uint8_t{250} : std::uint8_t{10},
                             to_byte(noise_g[i]), to_byte(255 - noise_b[i])});
      }
    }
    const double angle = rng.unit() * 2 * std::numbers::pi;
    p.dx = travel * std::cos(angle);
    p.dy = travel * std::sin(angle);
    const double span_x = std::max(1.0, spec.width - side - 2 * travel);
    const double span_y = std::max(1.0, spec.height - side - 2 * travel);
    p.x0 = travel + rng.unit() * span_x;
    p.y0 = travel + rng.unit() * span_y;
    // Single interior speed maximum, slightly skewed so no two frames tie.
    const auto [s, e] = spec.motion_bursts[b];
    const int len = e - s + 1;
    std::vector<double> speed(len);
    double total = 0;
    for (int i = 0; i < len; ++i) {
      speed[i] = std::min(i + 1, len - i) + 0.25 * i / len;
      total += speed[i];
    }
    double acc = 0;
    for (double v : speed) {
      acc += v;
      p.progress.push_back(acc / total);
    }
    out.push_back(std::move(p));
  }
  return out;
}

double burst_progress(const ScenarioSpec& spec, const BurstPatch& p, std::size_t b, int frame) {
  const auto [s, e] = spec.motion_bursts[b];
  if (frame < s) return 0.0;
  if (frame > e) return 1.0;
  return p.progress[frame - s];
}

const Rgb kActorColors[] = {{220, 40, 40},  {40, 170, 60}, {40, 80, 220}, {230, 200, 30},
                            {160, 50, 190}, {20, 190, 200}, {240, 120, 20}, {120, 120, 120}};

std::vector<std::size_t> far_to_near(const std::vector<ActorState>& states) {
  std::vector<std::size_t> order(states.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return states[a].rel_depth > states[b].rel_depth;
  });
  return order;
}

RgbImage compose_frame(const ScenarioSpec& spec, const RgbImage& bg,
                       const std::vector<BurstPatch>& patches,
                       const std::vector<ActorState>& states, int frame) {
  RgbImage img = bg;
  for (std::size_t b = 0; b < patches.size(); ++b) {
    const BurstPatch& p = patches[b];
    const double u = burst_progress(spec, p, b, frame);
    blit(img, p.texture, static_cast<int>(std::lround(p.x0 + u * p.dx)),
         static_cast<int>(std::lround(p.y0 + u * p.dy)));
  }
  const double sx = spec.width / kCanvas;
  const double sy = spec.height / kCanvas;
  for (std::size_t i : far_to_near(states)) {
    const Box& b = states[i].box;
    const Rgb c = kActorColors[i % std::size(kActorColors)];
    const int x0 = static_cast<int>(std::lround(b.x_min * sx));
    const int x1 = static_cast<int>(std::lround(b.x_max * sx));
    const int y0 = static_cast<int>(std::lround(b.y_min * sy));
    const int y1 = static_cast<int>(std::lround(b.y_max * sy));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) img.plot(x, y, c);
    }
  }
  return img;
}

Gray16Raster depth_record(const std::vector<ActorState>& states) {
  const int n = static_cast<int>(kCanvas);
  Gray16Raster r(n, n);
  for (int y = 0; y < n; ++y) {
    const double d = 0.6 + 0.4 * (1.0 - static_cast<double>(y) / (n - 1));
    const auto v = static_cast<std::uint16_t>(std::lround(d * 65535));
    for (int x = 0; x < n; ++x) r.at(x, y) = v;
  }
  for (std::size_t i : far_to_near(states)) {
    const Box& b = states[i].box;
    const auto v = static_cast<std::uint16_t>(std::lround(states[i].rel_depth * 65535));
    const int x0 = std::max(0, static_cast<int>(std::floor(b.x_min)));
    const int x1 = std::min(n, static_cast<int>(std::ceil(b.x_max)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.y_min)));
    const int y1 = std::min(n, static_cast<int>(std::ceil(b.y_max)));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) r.at(x, y) = v;
    }
  }
  return r;
}

std::string detection_record(const std::vector<ActorState>& states) {
  json dets = json::array();
  for (const ActorState& a : states) {
    dets.push_back({{"box", {a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max}},
                    {"label", a.class_label},
                    {"score", a.confidence}});
  }
  return json{{"detections", dets}}.dump();
}

std::vector<int> grid_frames(int frames, int budget) {
  std::vector<int> out;
  const int m = std::min(budget, frames);
  if (m == 1) return {(frames - 1) / 2};
  for (int j = 0; j < m; ++j) {
    out.push_back(static_cast<int>(std::lround(static_cast<double>(j) * (frames - 1) / (m - 1))));
  }
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  const int t = spec.duration_frames;
  if (t < 1) invalid(fmt::format("duration_frames must be >= 1, got {}", t));
  if (spec.width < 16 || spec.height < 16 || spec.width > 4096 || spec.height > 4096) {
    invalid(fmt::format("frame size {}x{} outside [16, 4096]", spec.width, spec.height));
  }
  if (!(spec.fps > 0.0) || !std::isfinite(spec.fps)) invalid("fps must be positive");
  for (const ScriptedActor& a : spec.actors) {
    if (a.class_label.empty()) invalid("actor without class_label");
    if (!(a.confidence >= 0.0 && a.confidence <= 1.0)) {
      invalid(fmt::format("actor '{}' confidence outside [0,1]", a.class_label));
    }
    if (a.waypoints.empty()) invalid(fmt::format("actor '{}' has no waypoints", a.class_label));
    for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
      const Waypoint& w = a.waypoints[i];
      if (i > 0 && w.frame <= a.waypoints[i - 1].frame) {
        invalid(fmt::format("actor '{}' waypoints not strictly sorted by frame", a.class_label));
      }
      if (w.frame < 0 || w.frame >= t) {
        invalid(fmt::format("actor '{}' waypoint frame {} outside [0, {})", a.class_label,
                            w.frame, t));
      }
      const double half = w.size / 2;
      if (!(w.size > 0) || w.cx - half < 0 || w.cy - half < 0 || w.cx + half > kCanvas ||
          w.cy + half > kCanvas) {
        invalid(fmt::format("actor '{}' box at frame {} leaves the 512 canvas", a.class_label,
                            w.frame));
      }
      if (!(w.rel_depth >= 0.0 && w.rel_depth <= 1.0)) {
        invalid(fmt::format("actor '{}' rel_depth outside [0,1]", a.class_label));
      }
    }
  }
  for (const auto& [s, e] : spec.motion_bursts) {
    if (s < 1 || e < s || e >= t) {
      invalid(fmt::format("motion burst [{}, {}] must satisfy 1 <= start <= end < {}", s, e, t));
    }
  }
  if (spec.failure_frame && (*spec.failure_frame < 0 || *spec.failure_frame >= t)) {
    invalid(fmt::format("failure_frame {} outside [0, {})", *spec.failure_frame, t));
  }
}

ScenarioSpec parse_scenario_spec(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) invalid("scenario spec is not a JSON object");
  ScenarioSpec spec;
  try {
    spec.duration_frames = doc.at("duration_frames").get<int>();
    spec.width = doc.value("width", spec.width);
    spec.height = doc.value("height", spec.height);
    spec.fps = doc.value("fps", spec.fps);
    spec.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("failure_frame") && !doc["failure_frame"].is_null()) {
      spec.failure_frame = doc["failure_frame"].get<int>();
    }
    for (const json& a : doc.value("actors", json::array())) {
      ScriptedActor actor;
      actor.class_label = a.at("class_label").get<std::string>();
      actor.is_gripper = a.value("is_gripper", false);
      actor.confidence = a.value("confidence", 0.9);
      for (const json& w : a.at("waypoints")) {
        actor.waypoints.push_back({w.at("frame").get<int>(), w.at("cx").get<double>(),
                                   w.at("cy").get<double>(), w.at("size").get<double>(),
                                   w.value("rel_depth", 0.5)});
      }
      spec.actors.push_back(std::move(actor));
    }
    for (const json& b : doc.value("motion_bursts", json::array())) {
      if (!b.is_array() || b.size() != 2) invalid("motion burst must be [start, end]");
      spec.motion_bursts.emplace_back(b[0].get<int>(), b[1].get<int>());
    }
  } catch (const json::exception& e) {
    invalid(fmt::format("malformed scenario spec: {}", e.what()));
  }
  validate(spec);
  return spec;
}

ScenarioSpec load_scenario_spec(const fs::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    invalid(fmt::format("cannot read scenario spec {}", path.string()));
  }
  return parse_scenario_spec(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                              bytes.size()));
}

std::string scenario_spec_json(const ScenarioSpec& spec) {
  json actors = json::array();
  for (const ScriptedActor& a : spec.actors) {
    json wps = json::array();
    for (const Waypoint& w : a.waypoints) {
      wps.push_back({{"frame", w.frame}, {"cx", w.cx}, {"cy", w.cy}, {"size", w.size},
                     {"rel_depth", w.rel_depth}});
    }
    actors.push_back({{"class_label", a.class_label}, {"is_gripper", a.is_gripper},
                      {"confidence", a.confidence}, {"waypoints", wps}});
  }
  json bursts = json::array();
  for (const auto& [s, e] : spec.motion_bursts) bursts.push_back({s, e});
  json doc = {{"duration_frames", spec.duration_frames}, {"width", spec.width},
              {"height", spec.height}, {"fps", spec.fps}, {"actors", actors},
              {"motion_bursts", bursts}, {"seed", spec.seed}};
  doc["failure_frame"] = spec.failure_frame ? json(*spec.failure_frame) : json(nullptr);
  return doc.dump(2) + "\n";
}

std::vector<ActorState> actor_states(const ScenarioSpec& spec, int frame) {
  std::vector<ActorState> out;
  for (const ScriptedActor& a : spec.actors) {
    const auto& wp = a.waypoints;
    Waypoint w = wp.front();
    if (frame >= wp.back().frame) {
      w = wp.back();
    } else if (frame > wp.front().frame) {
      const auto hi = std::upper_bound(wp.begin(), wp.end(), frame,
                                       [](int f, const Waypoint& p) { return f < p.frame; });
      const Waypoint& b = *hi;
      const Waypoint& p = *(hi - 1);
      const double u = static_cast<double>(frame - p.frame) / (b.frame - p.frame);
      auto lerp = [u](double x, double y) { return x + (y - x) * u; };
      w = {frame, lerp(p.cx, b.cx), lerp(p.cy, b.cy), lerp(p.size, b.size),
           lerp(p.rel_depth, b.rel_depth)};
    }
    const double half = w.size / 2;
    out.push_back({a.class_label, a.is_gripper, a.confidence,
                   Box{w.cx - half, w.cy - half, w.cx + half, w.cy + half}, w.rel_depth});
  }
  return out;
}

RgbImage render_scenario_frame(const ScenarioSpec& spec, int frame) {
  validate(spec);
  return compose_frame(spec, background(spec), burst_patches(spec), actor_states(spec, frame),
                       frame);
}

RobotProfile scenario_robot_profile(const ScenarioSpec& spec) {
  RobotProfile p;
  p.name = "synthetic-arm";
  p.num_arms = 1;
  p.end_effector_types = {"parallel_gripper"};
  p.sensors = {"rgb_camera"};
  p.workspace_note = "tabletop";
  std::set<std::string> labels;
  for (const ScriptedActor& a : spec.actors) {
    if (a.is_gripper && labels.insert(a.class_label).second) {
      p.gripper_class_labels.push_back(a.class_label);
    }
  }
  if (p.gripper_class_labels.empty()) p.gripper_class_labels.push_back("gripper");
  p.num_grippers = static_cast<int>(p.gripper_class_labels.size());
  return p;
}

std::vector<std::string> scenario_vocabulary(const ScenarioSpec& spec) {
  std::vector<std::string> out;
  for (const ScriptedActor& a : spec.actors) {
    if (std::find(out.begin(), out.end(), a.class_label) == out.end()) {
      out.push_back(a.class_label);
    }
  }
  return out;
}

std::string ground_truth_json(const GroundTruth& truth) {
  json bursts = json::array();
  for (const auto& [s, e] : truth.motion_bursts) bursts.push_back({s, e});
  json contacts = json::array();
  for (const ContactTransition& c : truth.contacts) {
    contacts.push_back({{"from_keyframe", c.from_keyframe}, {"to_keyframe", c.to_keyframe},
                        {"label", std::string(to_string(c.label))},
                        {"delta_iou", c.delta_iou}, {"delta_dist", c.delta_dist},
                        {"flag", std::string(to_string(c.flag))}});
  }
  json frames = json::array();
  for (std::size_t f = 0; f < truth.frames.size(); ++f) {
    json actors = json::array();
    for (const ActorState& a : truth.frames[f]) {
      actors.push_back({{"class_label", a.class_label},
                        {"box", {a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max}},
                        {"rel_depth", a.rel_depth}});
    }
    frames.push_back({{"frame", f}, {"actors", actors}});
  }
  json doc = {{"duration_frames", truth.duration_frames}, {"fps", truth.fps},
              {"motion_bursts", bursts}, {"keyframe_frames", truth.keyframe_frames},
              {"contacts", contacts}, {"frames", frames}};
  doc["failure_frame"] = truth.failure_frame ? json(*truth.failure_frame) : json(nullptr);
  return doc.dump(1) + "\n";
}

GroundTruth generate_episode(const ScenarioSpec& spec, const fs::path& out_dir,
                             const EpisodeOptions& options) {
  validate(spec);
  if (options.contact_budget < 1) invalid("contact_budget must be >= 1");
  std::error_code ec;
  fs::create_directories(out_dir / "frames", ec);
  if (!ec && options.write_perception) fs::create_directories(out_dir / "perception", ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, kModule,
                fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  }

  GroundTruth truth;
  truth.duration_frames = spec.duration_frames;
  truth.fps = spec.fps;
  truth.motion_bursts = spec.motion_bursts;
  truth.failure_frame = spec.failure_frame;
  truth.keyframe_frames = grid_frames(spec.duration_frames, options.contact_budget);
  truth.contacts = oracle::oracle_contacts(spec, truth.keyframe_frames);

  const RgbImage bg = background(spec);
  const auto patches = burst_patches(spec);
  for (int f = 0; f < spec.duration_frames; ++f) {
    auto states = actor_states(spec, f);
    const RgbImage img = compose_frame(spec, bg, patches, states, f);
    write_file_bytes(out_dir / "frames" / fmt::format("{:06d}.png", f), encode_png(img));
    if (options.write_perception) {
      write_text(out_dir / "perception" / fmt::format("{}.det.json", f), detection_record(states));
      write_file_bytes(out_dir / "perception" / fmt::format("{}.depth.png", f),
                       encode_png_gray16(depth_record(states)));
    }
    truth.frames.push_back(std::move(states));
  }

  write_text(out_dir / "ground_truth.json", ground_truth_json(truth));
  const RobotProfile robot = scenario_robot_profile(spec);
  json robot_doc = {{"name", robot.name},
                    {"num_arms", robot.num_arms},
                    {"num_grippers", robot.num_grippers},
                    {"end_effector_types", robot.end_effector_types},
                    {"sensors", robot.sensors},
                    {"workspace_note", robot.workspace_note},
                    {"constraints_note", robot.constraints_note},
                    {"gripper_class_labels", robot.gripper_class_labels}};
  write_text(out_dir / "robot.json", robot_doc.dump(2) + "\n");
  json config = {{"fps", spec.fps}, {"vocabulary", scenario_vocabulary(spec)}};
  write_text(out_dir / "config.json", config.dump(2) + "\n");
  return truth;
}

namespace oracle {

double box_iou(const Box& a, const Box& b) {
  const double wa = a.x_max - a.x_min, ha = a.y_max - a.y_min;
  const double wb = b.x_max - b.x_min, hb = b.y_max - b.y_min;
  if (wa <= 0 || ha <= 0 || wb <= 0 || hb <= 0) return 0.0;
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (wa * ha + wb * hb - inter);
}

double center_distance(const Box& a, const Box& b, double image_size) {
  const double ax = (a.x_min + a.x_max) / 2, ay = (a.y_min + a.y_max) / 2;
  const double bx = (b.x_min + b.x_max) / 2, by = (b.y_min + b.y_max) / 2;
  return std::hypot(ax - bx, ay - by) / (image_size * std::sqrt(2.0));
}

ContactLabel piecewise_label(double delta_iou, double delta_dist, const ContactThresholds& t) {
  if (delta_iou >= t.tau_iou && delta_dist <= -t.tau_d) return ContactLabel::kGain;
  if (-delta_iou >= t.tau_iou && delta_dist >= t.tau_d) return ContactLabel::kLoss;
  return ContactLabel::kStable;
}

std::vector<ContactTransition> oracle_contacts(const ScenarioSpec& spec,
                                               std::span<const int> keyframe_frames,
                                               const ContactThresholds& t) {
  std::vector<ContactTransition> out;
  int gripper = -1;
  for (std::size_t i = 0; i < spec.actors.size() && gripper < 0; ++i) {
    if (spec.actors[i].is_gripper) gripper = static_cast<int>(i);
  }
  for (std::size_t k = 0; k + 1 < keyframe_frames.size(); ++k) {
    ContactTransition c;
    c.from_keyframe = static_cast<int>(k);
    c.to_keyframe = static_cast<int>(k + 1);
    const auto now = actor_states(spec, keyframe_frames[k]);
    const auto next = actor_states(spec, keyframe_frames[k + 1]);
    int object = -1;
    double best = 0;
    for (std::size_t i = 0; gripper >= 0 && i < now.size(); ++i) {
      if (now[i].is_gripper) continue;
      const double d = center_distance(now[gripper].box, now[i].box, t.image_size);
      if (object < 0 || d < best) {
        object = static_cast<int>(i);
        best = d;
      }
    }
    if (object < 0) {
      c.flag = ContactFlag::kNoPair;
      out.push_back(c);
      continue;
    }
    const double iou0 = box_iou(now[gripper].box, now[object].box);
    const double iou1 = box_iou(next[gripper].box, next[object].box);
    c.delta_iou = iou1 - iou0;
    c.delta_dist = center_distance(next[gripper].box, next[object].box, t.image_size) - best;
    if (spec.actors[gripper].confidence < t.min_confidence ||
        spec.actors[object].confidence < t.min_confidence) {
      c.flag = ContactFlag::kLowConfidence;
    } else {
      c.label = piecewise_label(c.delta_iou, c.delta_dist, t);
    }
    out.push_back(c);
  }
  return out;
}

bool RelationTable::holds(int i, int j, Relation r) const {
  return cells[static_cast<std::size_t>(i) * size + j][static_cast<std::size_t>(r)];
}

int RelationTable::count() const {
  int n = 0;
  for (const auto& c : cells) n += c[0] + c[1] + c[2];
  return n;
}

RelationTable oracle_relations(std::span<const Vec3> centroids, double tol) {
  RelationTable table;
  table.size = static_cast<int>(centroids.size());
  table.cells.assign(centroids.size() * centroids.size(), {false, false, false});
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      if (i == j) continue;
      const Vec3& a = centroids[i];
      const Vec3& b = centroids[j];
      // Per axis: a strictly smaller than b by more than the tolerance.
      const std::array<double, 3> lhs{a.x, a.y, a.z};
      const std::array<double, 3> rhs{b.x, b.y, b.z};
      auto& cell = table.cells[i * centroids.size() + j];
      for (int axis = 0; axis < 3; ++axis) cell[axis] = lhs[axis] < rhs[axis] - tol;
    }
  }
  return table;
}

}  // namespace oracle

}  // namespace kite
