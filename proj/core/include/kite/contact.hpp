#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kite/model.hpp"

namespace kite {

struct ContactParams {
  double tau_iou = 0.1;
  double tau_d = 0.15;          // in units of the image diagonal
  double min_confidence = 0.5;  // both gripper and object must reach this
  double image_size = kKeyframeSize;
};

/// Throws Error(kInvalidArgument) unless tau_iou > 0, tau_d > 0, image_size > 0.
void validate(const ContactParams& params);

/// Center-to-center distance divided by the image diagonal (size * sqrt 2).
double normalized_center_distance(const Box& a, const Box& b,
                                  double image_size = kKeyframeSize);

struct NearestObject {
  std::size_t index = 0;  // into the object span
  double distance = 0.0;
};

/// Closest object by normalized center distance, ties to the lower
/// instance id (then lower index). Errors: kNoObjects.
NearestObject nearest_object_distance(const Detection& gripper, std::span<const Detection> objects,
                                      double image_size = kKeyframeSize);

/// GAIN iff dIoU >= tau_iou and dd <= -tau_d; LOSS iff -dIoU >= tau_iou and
/// dd >= tau_d; STABLE otherwise.
ContactLabel classify_deltas(double delta_iou, double delta_dist, const ContactParams& params);

struct GripperObjectPair {
  Detection gripper;
  Detection object;
};

/// Classifies keyframe k -> k+1 from the same gripper/object pair observed
/// at both keyframes. A detection below min_confidence yields STABLE with
/// ContactFlag::kLowConfidence (deltas are still recorded).
ContactTransition classify_contact(const GripperObjectPair& at_k, const GripperObjectPair& at_next,
                                   const ContactParams& params, int from_keyframe = 0);

/// One token per consecutive keyframe pair of a tracked detection sequence.
/// The object is the one nearest the gripper at k, followed into k+1 by
/// instance id; the gripper follows its track when it continues, otherwise
/// the most confident gripper at k+1 is used. Pairs without a gripper and
/// object at both keyframes produce STABLE with ContactFlag::kNoPair.
std::vector<ContactTransition> episode_contacts(std::span<const DetectionSet> tracked,
                                                const RobotProfile& profile,
                                                const ContactParams& params = {});

}  // namespace kite
