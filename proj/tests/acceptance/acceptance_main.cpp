// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli_runner.hpp"
#include "json.hpp"
#include "kite/bev.hpp"
#include "kite/contact.hpp"
#include "kite/evidence_json.hpp"
#include "kite/ingest.hpp"
#include "kite/perception.hpp"
#include "kite/saliency.hpp"
#include "kite/scene_graph.hpp"
#include "kite/serializer.hpp"
#include "kite/synthetic.hpp"
#include "kite/vlm.hpp"
#include "kite_cli/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace kite;
using namespace kite::testing;

namespace {

// Empty string means the criterion holds; otherwise the first failure.
using Check = std::function<std::string()>;

std::string budget_and_scaling() {
  const auto start = std::chrono::steady_clock::now();
  for (int frames : {10, 50, 200, 1000}) {
    TempDir dir;
    const ScenarioSpec spec = scaling_scenario(frames);
    generate_episode(spec, dir.path(), {.write_perception = false});
    const FrameSource source = open_frame_source(dir / "frames", spec.fps);
    MockDetectionBackend detector;
    detector.script_default({{{100, 100, 200, 200}, "gripper", 0.9}, {{270, 270, 370, 370}, "cup", 0.9}});
    MockDepthBackend depth;
    const cli::Analysis a =
        cli::analyze_episode(source, scenario_robot_profile(spec), std::nullopt, cli::RunConfig{},
                             detector, depth);
    const int expected = std::min(8, frames);
    std::vector<int> idx;
    for (const Keyframe& k : a.evidence.keyframes) idx.push_back(k.frame_index);
    if (static_cast<int>(idx.size()) != expected) {
      return fmt::format("T={}: {} keyframes, expected {}", frames, idx.size(), expected);
    }
    if (!std::is_sorted(idx.begin(), idx.end()) ||
        std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
      return fmt::format("T={}: keyframes not sorted and unique", frames);
    }
    if (detector.calls() != expected || depth.calls() != expected) {
      return fmt::format("T={}: {} detect and {} depth calls, expected {}", frames, detector.calls(),
                         depth.calls(), expected);
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds >= 60.0) return fmt::format("took {:.1f} s", seconds);
  return {};
}

bool burst_hit(const std::pair<int, int>& burst, const std::vector<SelectedFrame>& picked,
               bool peaks_only) {
  for (const SelectedFrame& s : picked) {
    if (peaks_only && s.reason != SelectionReason::kMotionPeak) continue;
    if (s.frame_index >= burst.first && s.frame_index <= burst.second) return true;
  }
  return false;
}

std::string motion_peak_recall() {
  int uniform_missing = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ScenarioSpec spec = recall_scenario(seed);
    const KeyframeSelectionParams params;
    const SaliencyCurve curve = saliency_series(
        spec.duration_frames, [&spec](int i) { return render_scenario_frame(spec, i); }, params);
    const auto motion = select_keyframes(curve, params);
    KeyframeSelectionParams uniform_params = params;
    uniform_params.mode = KeyframeMode::kUniform;
    const auto uniform = select_keyframes(curve, uniform_params);
    bool uniform_missed = false;
    for (const auto& burst : spec.motion_bursts) {
      if (!burst_hit(burst, motion, true)) {
        return fmt::format("seed {}: burst [{}, {}] has no motion peak", seed, burst.first,
                           burst.second);
      }
      if (!burst_hit(burst, uniform, false)) uniform_missed = true;
    }
    if (uniform_missed) ++uniform_missing;
  }
  if (uniform_missing < 5) {
    return fmt::format("uniform sampling missed a burst in only {} of 20 scenarios", uniform_missing);
  }
  return {};
}

ScenarioSpec random_pair_spec(std::mt19937_64& rng) {
  auto waypoint = [&rng](int frame) {
    const double size = rand_int(rng, 20, 160);
    const double half = size / 2;
    const double cx = half + rand_unit(rng) * (512 - size);
    const double cy = half + rand_unit(rng) * (512 - size);
    return Waypoint{frame, cx, cy, size, rand_unit(rng)};
  };
  auto confidence = [&rng] { return rand_unit(rng) < 0.15 ? 0.2 + 0.29 * rand_unit(rng) : 0.9; };
  ScenarioSpec spec;
  spec.duration_frames = 2;
  spec.actors.push_back({"gripper", true, confidence(), {waypoint(0), waypoint(1)}});
  // Half of the pairs start near each other so GAIN and LOSS both occur.
  Waypoint o0 = waypoint(0);
  Waypoint o1 = waypoint(1);
  if (rand_unit(rng) < 0.5) {
    const Waypoint& g = spec.actors[0].waypoints[rand_int(rng, 0, 1)];
    Waypoint& o = rand_int(rng, 0, 1) ? o0 : o1;
    o.size = g.size;
    o.cx = std::clamp(g.cx + rand_int(rng, -20, 20), o.size / 2, 512 - o.size / 2);
    o.cy = std::clamp(g.cy + rand_int(rng, -20, 20), o.size / 2, 512 - o.size / 2);
  }
  spec.actors.push_back({"cup", false, confidence(), {o0, o1}});
  return spec;
}

std::string contact_equivalence() {
  const std::array<double, 13> axis{-0.3, -0.25, -0.2, -0.15, -0.1, -0.05, 0.0,
                                    0.05, 0.1,   0.15, 0.2,  0.25, 0.3};
  const ContactParams params;
  const oracle::ContactThresholds thresholds;
  int cells = 0;
  for (double di : axis) {
    for (double dd : axis) {
      ++cells;
      if (classify_deltas(di, dd, params) != oracle::piecewise_label(di, dd, thresholds)) {
        return fmt::format("grid cell ({}, {}) disagrees", di, dd);
      }
    }
  }
  if (cells != 169) return fmt::format("grid has {} cells", cells);

  std::mt19937_64 rng(2024);
  std::set<ContactLabel> seen;
  const std::vector<int> frames{0, 1};
  for (int i = 0; i < 1000; ++i) {
    const ScenarioSpec spec = random_pair_spec(rng);
    std::array<GripperObjectPair, 2> pairs;
    for (int f = 0; f < 2; ++f) {
      const auto states = actor_states(spec, f);
      pairs[f].gripper = make_detection(states[0].class_label, states[0].box, states[0].confidence, 1);
      pairs[f].object = make_detection(states[1].class_label, states[1].box, states[1].confidence, 2);
    }
    const ContactTransition got = classify_contact(pairs[0], pairs[1], params);
    const ContactTransition want = oracle::oracle_contacts(spec, frames)[0];
    if (got.label != want.label || got.flag != want.flag ||
        std::abs(got.delta_iou - want.delta_iou) > 1e-9 ||
        std::abs(got.delta_dist - want.delta_dist) > 1e-9) {
      return fmt::format("random pair {}: {} vs oracle {}", i, to_string(got.label),
                         to_string(want.label));
    }
    seen.insert(got.label);
  }
  if (seen.size() != 3) return "random pairs did not exercise all three labels";
  return {};
}

std::string relation_equivalence() {
  std::mt19937_64 rng(77);
  constexpr std::array<Relation, 3> kRelations{Relation::kLeftOf, Relation::kAbove, Relation::kInFrontOf};
  for (int trial = 0; trial < 100; ++trial) {
    DetectionSet dets;
    std::vector<Vec3> centroids;
    for (int i = 0; i < 5; ++i) {
      const double cx = rand_int(rng, 10, 502), cy = rand_int(rng, 10, 502);
      dets.push_back(make_detection("obj", {cx - 8, cy - 8, cx + 8, cy + 8}, 0.9, i + 1, rand_unit(rng)));
      centroids.push_back(backproject_centroid(dets.back()));
    }
    const SceneGraph g = build_local_graph(dets, 0);
    const oracle::RelationTable truth = oracle::oracle_relations(centroids);
    const std::set<SceneEdge> edges(g.edges.begin(), g.edges.end());
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        if (a == b) continue;
        for (Relation r : kRelations) {
          const bool got = edges.count(SceneEdge{a + 1, r, b + 1}) > 0;
          if (got != truth.holds(a, b, r)) {
            return fmt::format("trial {}: {} {} {} disagrees", trial, a + 1, to_string(r), b + 1);
          }
          if (got && edges.count(SceneEdge{b + 1, r, a + 1}) > 0) {
            return fmt::format("trial {}: {} holds both ways between {} and {}", trial, to_string(r),
                               a + 1, b + 1);
          }
        }
      }
    }
  }
  return {};
}

std::string renderer_goldens() {
  for (int i = 0; i < 3; ++i) {
    const SceneGraph g = fixture_graph(i);
    const PngBytes first = render_bev(g, 0.5 * i + 0.25, i);
    if (first != render_bev(g, 0.5 * i + 0.25, i)) return fmt::format("BEV {} differs between runs", i);
    if (auto diff = check_golden(fmt::format("bev_fixture_{}.png", i), first); !diff.empty()) return diff;
  }
  const PngBytes board = fixture_storyboard();
  if (board != fixture_storyboard()) return "storyboard differs between runs";
  if (auto diff = check_golden("storyboard_fixture.png", board); !diff.empty()) return diff;
  const std::array<std::pair<double, int>, 4> spots{{{0.0, 3}, {0.2, 3}, {0.5, 5}, {1.0, 10}}};
  for (auto [s, r] : spots) {
    if (radius_for_confidence(s) != r) {
      return fmt::format("radius({}) = {}, expected {}", s, radius_for_confidence(s), r);
    }
  }
  return {};
}

std::string serializer_round_trip() {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 50; ++i) {
    const EpisodeEvidence e = random_evidence(rng, i % 2 == 1);
    const std::string text = serialize_context(e).text;
    const ContextEcho echo = parse_context(text);
    if (echo.keyframes.size() != e.keyframes.size()) return fmt::format("bundle {}: keyframe count", i);
    for (std::size_t k = 0; k < e.keyframes.size(); ++k) {
      if (echo.keyframes[k].first != e.keyframes[k].frame_index ||
          fmt::format("{:.2f}", echo.keyframes[k].second) != fmt::format("{:.2f}", e.keyframes[k].timestamp)) {
        return fmt::format("bundle {}: keyframe tag {} differs", i, k);
      }
    }
    if (echo.contacts.size() != e.contacts.size()) return fmt::format("bundle {}: contact count", i);
    for (std::size_t k = 0; k < e.contacts.size(); ++k) {
      if (echo.contacts[k] != e.contacts[k].label) return fmt::format("bundle {}: contact {}", i, k);
    }
    if (echo.edge_count != e.global_graph.edges.size()) return fmt::format("bundle {}: edge count", i);
    if (!e.plan_steps && text.find("[PLAN]") != std::string::npos) {
      return fmt::format("bundle {} has no plan but emits [PLAN]", i);
    }
  }
  if (auto diff = check_golden("context_fixture.txt", serialize_context(fixture_evidence()).text);
      !diff.empty()) {
    return diff;
  }
  EpisodeEvidence no_plan = fixture_evidence();
  no_plan.plan_steps.reset();
  if (serialize_context(no_plan).text.find("[PLAN]") != std::string::npos) return "fixture without plan emits [PLAN]";
  return {};
}

std::string localization_parsing() {
  const auto cases = localization_cases();
  if (cases.size() != 12) return fmt::format("{} cases, expected 12", cases.size());
  for (const auto& c : cases) {
    try {
      const LocalizationResult r = parse_localization(c.raw, c.valid_frames);
      if (c.error) return fmt::format("{}: expected {}, parsed instead", c.name, to_string(*c.error));
      if (r.candidates.size() != c.expected.size()) return fmt::format("{}: candidate count", c.name);
      for (std::size_t i = 0; i < c.expected.size(); ++i) {
        if (r.candidates[i].frame_num != c.expected[i].first ||
            r.candidates[i].confidence != c.expected[i].second) {
          return fmt::format("{}: candidate {} differs", c.name, i);
        }
      }
      if (r.dropped_frames != c.dropped || r.clamped != c.clamped) return fmt::format("{}: flags", c.name);
    } catch (const Error& e) {
      if (!c.error || e.code() != *c.error) return fmt::format("{}: unexpected {}", c.name, e.what());
    }
  }
  return {};
}

std::string end_to_end() {
  TempDir work;
  generate_episode(load_scenario_spec(fixtures_dir() / "episode_spec.json"), work / "episode");
  auto analyze = [&](const fs::path& out, std::vector<std::string> extra) {
    std::vector<std::string> args{"analyze",
                                  "--frames", (work / "episode/frames").string(),
                                  "--robot-profile", (fixtures_dir() / "robot.json").string(),
                                  "--plan", (fixtures_dir() / "plan.txt").string(),
                                  "--ovd", "dir:" + (work / "episode/perception").string(),
                                  "--depth", "dir:" + (work / "episode/perception").string(),
                                  "--vlm", "mock:" + (fixtures_dir() / "mock_vlm.json").string(),
                                  "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args);
  };
  for (const char* name : {"run1", "run2", "nobev", "uniform"}) {
    std::vector<std::string> extra;
    if (std::string(name) == "nobev") extra = {"--no-bev"};
    if (std::string(name) == "uniform") extra = {"--keyframe-mode", "uniform"};
    const auto r = analyze(work / name, extra);
    if (r.code != 0) return fmt::format("{} exited {}: {}", name, r.code, r.err);
  }
  if (auto diff = compare_trees(work / "run1", work / "run2"); !diff.empty()) return "runs differ: " + diff;
  const auto images = [&](const char* run) {
    return nlohmann::json::parse(read_text(work / run / "prompt.json"))["image_count"].get<int>();
  };
  const auto keyframes = [&](const char* run) {
    return parse_keyframe_indices(read_text(work / run / "keyframes.json"));
  };
  const int m = static_cast<int>(keyframes("run1").size());
  if (images("run1") != 2 * m || images("nobev") != m) {
    return fmt::format("prompt images {} and {} for M={}", images("run1"), images("nobev"), m);
  }
  if (keyframes("uniform") == keyframes("run1")) return "uniform mode left the keyframe list unchanged";
  return {};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Check>> criteria{
      {"keyframe budget and scaling", budget_and_scaling},
      {"motion-peak recall", motion_peak_recall},
      {"contact rule equivalence", contact_equivalence},
      {"relation equivalence", relation_equivalence},
      {"renderer determinism and constants", renderer_goldens},
      {"serializer round-trip and golden", serializer_round_trip},
      {"localization parsing", localization_parsing},
      {"end-to-end determinism", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string problem;
    try {
      problem = check();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (problem.empty()) {
      std::cout << fmt::format("PASS {} ({:.2f}s)\n", name, seconds);
    } else {
      ++failed;
      std::cout << fmt::format("FAIL {} ({:.2f}s): {}\n", name, seconds, problem);
    }
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
