#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kite/model.hpp"

namespace kite {

/// `{"name", "num_arms", "num_grippers", "end_effector_types", "sensors",
/// "workspace_note", "constraints_note", "gripper_class_labels"}`.
/// Errors: kInvalidArgument.
RobotProfile parse_robot_profile(std::string_view json_text);
RobotProfile load_robot_profile(const std::filesystem::path& path);
std::string robot_profile_json(const RobotProfile& profile);

/// One plan step per non-blank line.
std::vector<std::string> load_plan(const std::filesystem::path& path);

/// `[{"ordinal", "frame_index", "timestamp", "reason"}, ...]`
std::string keyframes_json(std::span<const Keyframe> keyframes);
/// Frame indices from keyframes_json output. Errors: kInvalidArgument.
std::vector<int> parse_keyframe_indices(std::string_view json_text);

/// Full bundle without pixel data; images are referenced by file name.
std::string evidence_json(const EpisodeEvidence& evidence);

}  // namespace kite
