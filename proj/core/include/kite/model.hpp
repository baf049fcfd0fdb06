#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kite/image.hpp"

namespace kite {

/// Side length of every keyframe raster handed to perception and the VLM.
inline constexpr int kKeyframeSize = 512;
/// Default keyframe budget M.
inline constexpr int kDefaultBudget = 8;
inline constexpr std::size_t kMaxDetectionsPerKeyframe = 5;

struct VideoMeta {
  int frame_count = 0;
  int width = 0;
  int height = 0;
  double fps = 0.0;  // may be a hint when the source carries explicit timestamps
  std::string source_id;
};

struct Frame {
  int index = 0;
  double timestamp = 0.0;
  RgbImage pixels;
};

enum class SelectionReason { kMotionPeak, kUniformBackfill };

struct Keyframe {
  int frame_index = 0;
  double timestamp = 0.0;
  RgbImage image;  // kKeyframeSize x kKeyframeSize
  SelectionReason reason = SelectionReason::kUniformBackfill;
};

/// Axis-aligned box in keyframe pixel coordinates.
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept;
  double center_x() const noexcept { return 0.5 * (x_min + x_max); }
  double center_y() const noexcept { return 0.5 * (y_min + y_max); }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection over union; 0 when either box is degenerate.
double iou(const Box& a, const Box& b) noexcept;

struct DepthStats {
  double median_rel_depth = 0.0;
  double mean_rel_depth = 0.0;

  friend bool operator==(const DepthStats&, const DepthStats&) = default;
};

struct Detection {
  Box box;
  std::string class_label;
  double confidence = 0.0;
  std::optional<int> instance_id;  // set by link_tracks
  std::optional<DepthStats> depth_stats;

  friend bool operator==(const Detection&, const Detection&) = default;
};

using DetectionSet = std::vector<Detection>;

enum class ContactLabel { kGain, kLoss, kStable };

/// Why a STABLE token was emitted without evaluating the geometric rule.
enum class ContactFlag { kNone, kNoPair, kLowConfidence };

struct ContactTransition {
  int from_keyframe = 0;
  int to_keyframe = 1;
  ContactLabel label = ContactLabel::kStable;
  double delta_iou = 0.0;
  double delta_dist = 0.0;  // diagonal-normalized
  ContactFlag flag = ContactFlag::kNone;

  friend bool operator==(const ContactTransition&, const ContactTransition&) = default;
};

struct RobotProfile {
  std::string name;
  int num_arms = 1;
  int num_grippers = 0;
  std::vector<std::string> end_effector_types;
  std::vector<std::string> sensors;
  std::string workspace_note;
  std::string constraints_note;
  std::vector<std::string> gripper_class_labels;

  bool is_gripper_label(std::string_view label) const;
};

struct Track {
  int instance_id = 0;
  std::string class_label;
  /// keyframe ordinal -> index into that keyframe's DetectionSet
  std::map<int, std::size_t> observations;

  friend bool operator==(const Track&, const Track&) = default;
};

/// Sorted by instance_id; ids are dense starting at 1.
using TrackSet = std::vector<Track>;

enum class Relation { kLeftOf, kAbove, kInFrontOf };

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct SceneNode {
  int instance_id = 0;
  std::string class_label;
  Vec3 centroid;         // X right, Y down, Z = normalized relative depth
  double pixel_cx = 0;   // box center in keyframe pixels, used by the BEV
  double pixel_cy = 0;
  double confidence = 0.0;

  friend bool operator==(const SceneNode&, const SceneNode&) = default;
};

struct SceneEdge {
  int subject_id = 0;
  Relation relation = Relation::kLeftOf;
  int object_id = 0;

  friend auto operator<=>(const SceneEdge&, const SceneEdge&) = default;
};

struct SceneGraph {
  int keyframe_ordinal = 0;
  std::vector<SceneNode> nodes;
  std::vector<SceneEdge> edges;  // sorted, unique
};

struct GlobalNode {
  int instance_id = 0;
  std::string class_label;

  friend bool operator==(const GlobalNode&, const GlobalNode&) = default;
};

struct PersistentEdge {
  SceneEdge edge;
  int persistence = 0;  // keyframes in which the relation holds

  friend bool operator==(const PersistentEdge&, const PersistentEdge&) = default;
};

struct GlobalSceneGraph {
  std::vector<GlobalNode> nodes;                      // one per track
  std::vector<std::vector<SceneEdge>> keyframe_edges; // per keyframe ordinal
  std::vector<PersistentEdge> edges;                  // sorted by edge, persistence >= 1
  int keyframe_count = 0;
};

using PngBytes = std::vector<std::uint8_t>;

struct EpisodeEvidence {
  VideoMeta meta;
  RobotProfile robot;
  std::optional<std::vector<std::string>> plan_steps;
  std::vector<Keyframe> keyframes;
  std::vector<DetectionSet> detections;
  TrackSet tracks;
  std::vector<ContactTransition> contacts;
  std::vector<SceneGraph> local_graphs;
  GlobalSceneGraph global_graph;
  /// Empty when pseudo-BEV rendering is disabled; otherwise one per keyframe.
  std::vector<PngBytes> bev_images;
};

struct Violation {
  std::string code;    // e.g. "BEV_COUNT_MISMATCH"
  std::string detail;
};

struct ValidationOptions {
  int budget = kDefaultBudget;
  bool contact_analysis = true;
};

/// Lists every violated bundle invariant; an empty result means valid.
std::vector<Violation> validate_evidence(const EpisodeEvidence& evidence,
                                         const ValidationOptions& options = {});

std::string_view to_string(SelectionReason reason);
std::string_view to_string(ContactLabel label);
std::string_view to_string(ContactFlag flag);
/// Lowercase relation token: left_of, above, in_front_of.
std::string_view to_string(Relation relation);

std::optional<SelectionReason> parse_selection_reason(std::string_view s);
std::optional<ContactLabel> parse_contact_label(std::string_view s);
std::optional<ContactFlag> parse_contact_flag(std::string_view s);
std::optional<Relation> parse_relation(std::string_view s);

}  // namespace kite
