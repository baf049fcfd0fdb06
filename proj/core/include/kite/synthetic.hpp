#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kite/image.hpp"
#include "kite/model.hpp"

namespace kite {

/// Actor pose at a frame. cx, cy and size (square side) are in keyframe
/// pixels (512 x 512); rel_depth is in [0, 1], smaller is nearer.
struct Waypoint {
  int frame = 0;
  double cx = 0.0;
  double cy = 0.0;
  double size = 0.0;
  double rel_depth = 0.5;
};

struct ScriptedActor {
  std::string class_label;
  bool is_gripper = false;
  double confidence = 0.9;
  std::vector<Waypoint> waypoints;  // sorted by frame
};

struct ScenarioSpec {
  int duration_frames = 0;
  int width = 128;
  int height = 128;
  double fps = 10.0;
  std::vector<ScriptedActor> actors;
  std::vector<std::pair<int, int>> motion_bursts;  // inclusive frame intervals
  std::optional<int> failure_frame;
  std::uint64_t seed = 0;
};

/// Errors: kInvalidSpec.
void validate(const ScenarioSpec& spec);
ScenarioSpec parse_scenario_spec(std::string_view json_text);
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);
std::string scenario_spec_json(const ScenarioSpec& spec);

struct ActorState {
  std::string class_label;
  bool is_gripper = false;
  double confidence = 0.0;
  Box box;  // keyframe pixels
  double rel_depth = 0.0;
};

/// Linear interpolation between waypoints, held constant outside them.
std::vector<ActorState> actor_states(const ScenarioSpec& spec, int frame);

/// One frame at spec resolution: seeded texture, burst patches, actors.
RgbImage render_scenario_frame(const ScenarioSpec& spec, int frame);

struct GroundTruth {
  int duration_frames = 0;
  double fps = 0.0;
  std::vector<std::pair<int, int>> motion_bursts;
  std::optional<int> failure_frame;
  std::vector<int> keyframe_frames;  // uniform grid used for the contact labels
  std::vector<ContactTransition> contacts;
  std::vector<std::vector<ActorState>> frames;
};

struct EpisodeOptions {
  int contact_budget = kDefaultBudget;
  bool write_perception = true;
};

/// Writes frames/NNNNNN.png, perception/<i>.det.json, perception/<i>.depth.png,
/// ground_truth.json, robot.json and config.json under `out_dir`.
GroundTruth generate_episode(const ScenarioSpec& spec, const std::filesystem::path& out_dir,
                             const EpisodeOptions& options = {});

std::string ground_truth_json(const GroundTruth& truth);
RobotProfile scenario_robot_profile(const ScenarioSpec& spec);
std::vector<std::string> scenario_vocabulary(const ScenarioSpec& spec);

/// Reference implementations used to check the pipeline. They deliberately
/// share nothing with the contact and scene-graph code.
namespace oracle {

struct ContactThresholds {
  double tau_iou = 0.1;
  double tau_d = 0.15;
  double min_confidence = 0.5;
  double image_size = 512.0;
};

double box_iou(const Box& a, const Box& b);
double center_distance(const Box& a, const Box& b, double image_size);
ContactLabel piecewise_label(double delta_iou, double delta_dist, const ContactThresholds& t);

/// Contact tokens between consecutive entries of `keyframe_frames`, on the
/// exact scripted geometry. Gripper is the first gripper actor; the object
/// is the non-gripper actor nearest it at the earlier frame.
std::vector<ContactTransition> oracle_contacts(const ScenarioSpec& spec,
                                               std::span<const int> keyframe_frames,
                                               const ContactThresholds& t = {});

struct RelationTable {
  int size = 0;
  /// [i * size + j] -> {left_of, above, in_front_of} for the ordered pair (i, j).
  std::vector<std::array<bool, 3>> cells;

  bool holds(int i, int j, Relation r) const;
  int count() const;
};

RelationTable oracle_relations(std::span<const Vec3> centroids, double tol = 0.05);

}  // namespace oracle

}  // namespace kite
