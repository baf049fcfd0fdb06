#include "kite/model.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace kite {

double Box::area() const noexcept {
  return std::max(0.0, width()) * std::max(0.0, height());
}

double iou(const Box& a, const Box& b) noexcept {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

bool RobotProfile::is_gripper_label(std::string_view label) const {
  return std::find(gripper_class_labels.begin(), gripper_class_labels.end(), label) !=
         gripper_class_labels.end();
}

namespace {

class Report {
 public:
  template <typename... Args>
  void add(const char* code, fmt::format_string<Args...> f, Args&&... args) {
    out_.push_back({code, fmt::format(f, std::forward<Args>(args)...)});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_detection(Report& r, std::size_t k, std::size_t j, const Detection& d) {
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    r.add("CONFIDENCE_RANGE", "keyframe {} detection {}: confidence {}", k, j, d.confidence);
  }
  const Box& b = d.box;
  const double s = kKeyframeSize;
  if (!(b.x_min >= 0.0 && b.x_min < b.x_max && b.x_max <= s && b.y_min >= 0.0 &&
        b.y_min < b.y_max && b.y_max <= s)) {
    r.add("BOX_RANGE", "keyframe {} detection {}: box ({}, {}, {}, {})", k, j, b.x_min,
          b.y_min, b.x_max, b.y_max);
  }
  if (d.depth_stats &&
      !(in_unit(d.depth_stats->median_rel_depth) && in_unit(d.depth_stats->mean_rel_depth))) {
    r.add("DEPTH_RANGE", "keyframe {} detection {}: depth stats outside [0,1]", k, j);
  }
}

}  // namespace

std::vector<Violation> validate_evidence(const EpisodeEvidence& e,
                                         const ValidationOptions& options) {
  Report r;
  const VideoMeta& m = e.meta;
  if (m.frame_count < 1) r.add("META_FRAME_COUNT", "frame_count {} < 1", m.frame_count);
  if (m.width < 16 || m.height < 16) {
    r.add("META_DIMENSIONS", "frame size {}x{} below 16x16", m.width, m.height);
  }
  if (!(m.fps > 0.0)) r.add("META_FPS", "fps {} not positive", m.fps);

  if (e.robot.num_arms < 1) r.add("ROBOT_ARMS", "num_arms {} < 1", e.robot.num_arms);
  if (e.robot.num_grippers < 0) {
    r.add("ROBOT_GRIPPERS", "num_grippers {} < 0", e.robot.num_grippers);
  }
  if (options.contact_analysis && e.robot.gripper_class_labels.empty()) {
    r.add("ROBOT_GRIPPER_LABELS", "contact analysis enabled but no gripper class labels");
  }

  const std::size_t n = e.keyframes.size();
  if (static_cast<int>(n) > options.budget) {
    r.add("KEYFRAME_BUDGET", "{} keyframes exceed budget {}", n, options.budget);
  }
  std::set<int> seen;
  for (std::size_t k = 0; k < n; ++k) {
    const Keyframe& kf = e.keyframes[k];
    if (!seen.insert(kf.frame_index).second) {
      r.add("KEYFRAME_DUPLICATE", "frame index {} repeated", kf.frame_index);
    }
    if (kf.frame_index < 0 || kf.frame_index >= m.frame_count) {
      r.add("KEYFRAME_RANGE", "frame index {} outside [0, {})", kf.frame_index, m.frame_count);
    }
    if (kf.image.width() != kKeyframeSize || kf.image.height() != kKeyframeSize) {
      r.add("KEYFRAME_IMAGE_SIZE", "keyframe {} is {}x{}", k, kf.image.width(),
            kf.image.height());
    }
    if (kf.timestamp < 0.0) r.add("TIMESTAMP_ORDER", "keyframe {} has negative timestamp", k);
    if (k > 0) {
      const Keyframe& prev = e.keyframes[k - 1];
      if (kf.frame_index <= prev.frame_index) {
        r.add("KEYFRAME_ORDER", "keyframe {} index {} not after {}", k, kf.frame_index,
              prev.frame_index);
      } else if (kf.timestamp <= prev.timestamp) {
        r.add("TIMESTAMP_ORDER", "keyframe {} timestamp {} not after {}", k, kf.timestamp,
              prev.timestamp);
      }
    }
  }

  if (e.detections.size() != n) {
    r.add("DETECTION_COUNT_MISMATCH", "{} detection sets for {} keyframes",
          e.detections.size(), n);
  }
  std::set<int> track_ids;
  for (const Track& t : e.tracks) track_ids.insert(t.instance_id);
  for (std::size_t k = 0; k < e.detections.size(); ++k) {
    const DetectionSet& set = e.detections[k];
    if (set.size() > kMaxDetectionsPerKeyframe) {
      r.add("DETECTION_CAP", "keyframe {} has {} detections", k, set.size());
    }
    for (std::size_t j = 0; j < set.size(); ++j) {
      check_detection(r, k, j, set[j]);
      if (set[j].instance_id && !track_ids.contains(*set[j].instance_id)) {
        r.add("TRACK_REFERENCE", "keyframe {} detection {} references unknown id {}", k, j,
              *set[j].instance_id);
      }
    }
  }

  if (e.local_graphs.size() != n) {
    r.add("GRAPH_COUNT_MISMATCH", "{} local graphs for {} keyframes", e.local_graphs.size(), n);
  }
  for (const SceneGraph& g : e.local_graphs) {
    std::set<int> ids;
    for (const SceneNode& node : g.nodes) {
      ids.insert(node.instance_id);
      if (!in_unit(node.centroid.z)) {
        r.add("DEPTH_RANGE", "graph {} node {} has z {}", g.keyframe_ordinal, node.instance_id,
              node.centroid.z);
      }
    }
    for (const SceneEdge& edge : g.edges) {
      if (edge.subject_id == edge.object_id || !ids.contains(edge.subject_id) ||
          !ids.contains(edge.object_id)) {
        r.add("GRAPH_EDGE_ENDPOINT", "graph {} edge {}->{} is invalid", g.keyframe_ordinal,
              edge.subject_id, edge.object_id);
      }
    }
  }

  if (!e.bev_images.empty() && e.bev_images.size() != n) {
    r.add("BEV_COUNT_MISMATCH", "{} BEV images for {} keyframes", e.bev_images.size(), n);
  }

  const std::size_t expected_contacts = n >= 2 ? n - 1 : 0;
  if (e.contacts.size() != expected_contacts) {
    r.add("CONTACT_COUNT_MISMATCH", "{} contact tokens for {} keyframes", e.contacts.size(), n);
  }
  for (std::size_t i = 0; i < e.contacts.size(); ++i) {
    const ContactTransition& c = e.contacts[i];
    if (c.from_keyframe != static_cast<int>(i) || c.to_keyframe != c.from_keyframe + 1) {
      r.add("CONTACT_ORDER", "contact {} spans {}->{}", i, c.from_keyframe, c.to_keyframe);
    }
  }
  return r.take();
}

std::string_view to_string(SelectionReason reason) {
  return reason == SelectionReason::kMotionPeak ? "MOTION_PEAK" : "UNIFORM_BACKFILL";
}

std::string_view to_string(ContactLabel label) {
  switch (label) {
    case ContactLabel::kGain: return "GAIN";
    case ContactLabel::kLoss: return "LOSS";
    case ContactLabel::kStable: return "STABLE";
  }
  return "STABLE";
}

std::string_view to_string(ContactFlag flag) {
  switch (flag) {
    case ContactFlag::kNone: return "NONE";
    case ContactFlag::kNoPair: return "NO_PAIR";
    case ContactFlag::kLowConfidence: return "LOW_CONFIDENCE";
  }
  return "NONE";
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::kLeftOf: return "left_of";
    case Relation::kAbove: return "above";
    case Relation::kInFrontOf: return "in_front_of";
  }
  return "left_of";
}

std::optional<SelectionReason> parse_selection_reason(std::string_view s) {
  if (s == "MOTION_PEAK") return SelectionReason::kMotionPeak;
  if (s == "UNIFORM_BACKFILL") return SelectionReason::kUniformBackfill;
  return std::nullopt;
}

std::optional<ContactLabel> parse_contact_label(std::string_view s) {
  if (s == "GAIN") return ContactLabel::kGain;
  if (s == "LOSS") return ContactLabel::kLoss;
  if (s == "STABLE") return ContactLabel::kStable;
  return std::nullopt;
}

std::optional<ContactFlag> parse_contact_flag(std::string_view s) {
  if (s == "NONE") return ContactFlag::kNone;
  if (s == "NO_PAIR") return ContactFlag::kNoPair;
  if (s == "LOW_CONFIDENCE") return ContactFlag::kLowConfidence;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view s) {
  if (s == "left_of") return Relation::kLeftOf;
  if (s == "above") return Relation::kAbove;
  if (s == "in_front_of") return Relation::kInFrontOf;
  return std::nullopt;
}

}  // namespace kite
