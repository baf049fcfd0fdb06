#include "kite/contact.hpp"

#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "kite/error.hpp"

namespace kite {

namespace {

constexpr const char* kModule = "contact";

// Most confident gripper; ties go to the lower instance id.
std::optional<std::size_t> best_gripper(const DetectionSet& set, const RobotProfile& profile) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!profile.is_gripper_label(set[i].class_label)) continue;
    if (!best || set[i].confidence > set[*best].confidence ||
        (set[i].confidence == set[*best].confidence &&
         set[i].instance_id.value_or(0) < set[*best].instance_id.value_or(0))) {
      best = i;
    }
  }
  return best;
}

std::optional<std::size_t> find_instance(const DetectionSet& set, std::optional<int> id) {
  if (!id) return std::nullopt;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].instance_id == id) return i;
  }
  return std::nullopt;
}

ContactTransition no_pair(int k) {
  ContactTransition t;
  t.from_keyframe = k;
  t.to_keyframe = k + 1;
  t.flag = ContactFlag::kNoPair;
  return t;
}

}  // namespace

void validate(const ContactParams& params) {
  if (!(params.tau_iou > 0.0) || !(params.tau_d > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("thresholds must be positive (tau_iou={}, tau_d={})", params.tau_iou,
                            params.tau_d));
  }
  if (!(params.image_size > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "image_size must be positive");
  }
}

double normalized_center_distance(const Box& a, const Box& b, double image_size) {
  const double dx = a.center_x() - b.center_x();
  const double dy = a.center_y() - b.center_y();
  return std::hypot(dx, dy) / (image_size * std::sqrt(2.0));
}

NearestObject nearest_object_distance(const Detection& gripper, std::span<const Detection> objects,
                                      double image_size) {
  if (objects.empty()) {
    throw Error(ErrorCode::kNoObjects, kModule, "no candidate objects in keyframe");
  }
  NearestObject best{0, normalized_center_distance(gripper.box, objects[0].box, image_size)};
  for (std::size_t i = 1; i < objects.size(); ++i) {
    const double d = normalized_center_distance(gripper.box, objects[i].box, image_size);
    const bool closer = d < best.distance;
    const bool tie_lower_id =
        d == best.distance &&
        objects[i].instance_id.value_or(0) < objects[best.index].instance_id.value_or(0);
    if (closer || tie_lower_id) best = {i, d};
  }
  return best;
}

ContactLabel classify_deltas(double delta_iou, double delta_dist, const ContactParams& params) {
  if (delta_iou >= params.tau_iou && delta_dist <= -params.tau_d) return ContactLabel::kGain;
  if (-delta_iou >= params.tau_iou && delta_dist >= params.tau_d) return ContactLabel::kLoss;
  return ContactLabel::kStable;
}

ContactTransition classify_contact(const GripperObjectPair& at_k, const GripperObjectPair& at_next,
                                   const ContactParams& params, int from_keyframe) {
  validate(params);
  const double iou_k = iou(at_k.gripper.box, at_k.object.box);
  const double iou_next = iou(at_next.gripper.box, at_next.object.box);
  const double d_k = normalized_center_distance(at_k.gripper.box, at_k.object.box, params.image_size);
  const double d_next =
      normalized_center_distance(at_next.gripper.box, at_next.object.box, params.image_size);

  ContactTransition t;
  t.from_keyframe = from_keyframe;
  t.to_keyframe = from_keyframe + 1;
  t.delta_iou = iou_next - iou_k;
  t.delta_dist = d_next - d_k;

  const double c = params.min_confidence;
  if (at_k.gripper.confidence < c || at_k.object.confidence < c ||
      at_next.gripper.confidence < c || at_next.object.confidence < c) {
    t.label = ContactLabel::kStable;
    t.flag = ContactFlag::kLowConfidence;
    return t;
  }
  t.label = classify_deltas(t.delta_iou, t.delta_dist, params);
  return t;
}

std::vector<ContactTransition> episode_contacts(std::span<const DetectionSet> tracked,
                                                const RobotProfile& profile,
                                                const ContactParams& params) {
  validate(params);
  std::vector<ContactTransition> out;
  for (std::size_t k = 0; k + 1 < tracked.size(); ++k) {
    const int from = static_cast<int>(k);
    const DetectionSet& cur = tracked[k];
    const DetectionSet& nxt = tracked[k + 1];

    const auto gripper_k = best_gripper(cur, profile);
    DetectionSet objects;
    for (const Detection& d : cur) {
      if (!profile.is_gripper_label(d.class_label)) objects.push_back(d);
    }
    if (!gripper_k || objects.empty()) {
      out.push_back(no_pair(from));
      continue;
    }
    const Detection& gripper = cur[*gripper_k];
    const NearestObject nearest = nearest_object_distance(gripper, objects, params.image_size);
    const Detection& object = objects[nearest.index];

    auto gripper_next = find_instance(nxt, gripper.instance_id);
    if (!gripper_next) gripper_next = best_gripper(nxt, profile);
    const auto object_next = find_instance(nxt, object.instance_id);
    if (!gripper_next || !object_next) {
      out.push_back(no_pair(from));
      continue;
    }
    out.push_back(classify_contact({gripper, object}, {nxt[*gripper_next], nxt[*object_next]},
                                   params, from));
  }
  return out;
}

}  // namespace kite
