#include "kite/evidence_json.hpp"

#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "kite/error.hpp"

namespace kite {

using nlohmann::json;

namespace {

constexpr const char* kModule = "evidence";

std::string text_of(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

json box_json(const Box& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

json edge_json(const SceneEdge& e) {
  return {{"subject", e.subject_id},
          {"relation", std::string(to_string(e.relation))},
          {"object", e.object_id}};
}

}  // namespace

RobotProfile parse_robot_profile(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "robot profile is not a JSON object");
  }
  RobotProfile p;
  try {
    p.name = doc.at("name").get<std::string>();
    p.num_arms = doc.value("num_arms", p.num_arms);
    p.num_grippers = doc.value("num_grippers", p.num_grippers);
    p.end_effector_types = doc.value("end_effector_types", std::vector<std::string>{});
    p.sensors = doc.value("sensors", std::vector<std::string>{});
    p.workspace_note = doc.value("workspace_note", std::string{});
    p.constraints_note = doc.value("constraints_note", std::string{});
    p.gripper_class_labels = doc.value("gripper_class_labels", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("malformed robot profile: {}", e.what()));
  }
  if (p.num_arms < 1 || p.num_grippers < 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("robot profile needs num_arms >= 1 and num_grippers >= 0"));
  }
  return p;
}

RobotProfile load_robot_profile(const std::filesystem::path& path) {
  return parse_robot_profile(text_of(path));
}

std::string robot_profile_json(const RobotProfile& p) {
  json doc = {{"name", p.name},
              {"num_arms", p.num_arms},
              {"num_grippers", p.num_grippers},
              {"end_effector_types", p.end_effector_types},
              {"sensors", p.sensors},
              {"workspace_note", p.workspace_note},
              {"constraints_note", p.constraints_note},
              {"gripper_class_labels", p.gripper_class_labels}};
  return doc.dump(2) + "\n";
}

std::vector<std::string> load_plan(const std::filesystem::path& path) {
  std::istringstream in(text_of(path));
  std::vector<std::string> steps;
  for (std::string line; std::getline(in, line);) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    steps.push_back(line.substr(b, e - b + 1));
  }
  return steps;
}

std::string keyframes_json(std::span<const Keyframe> keyframes) {
  json arr = json::array();
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const Keyframe& k = keyframes[i];
    arr.push_back({{"ordinal", i},
                   {"frame_index", k.frame_index},
                   {"timestamp", k.timestamp},
                   {"reason", std::string(to_string(k.reason))}});
  }
  return arr.dump(2) + "\n";
}

std::vector<int> parse_keyframe_indices(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "keyframe list is not a JSON array");
  }
  std::vector<int> out;
  for (const json& k : doc) {
    if (!k.is_object() || !k.contains("frame_index") || !k["frame_index"].is_number_integer()) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "keyframe entry lacks frame_index");
    }
    out.push_back(k["frame_index"].get<int>());
  }
  return out;
}

std::string evidence_json(const EpisodeEvidence& e) {
  json kfs = json::array();
  for (std::size_t i = 0; i < e.keyframes.size(); ++i) {
    const Keyframe& k = e.keyframes[i];
    json dets = json::array();
    if (i < e.detections.size()) {
      for (const Detection& d : e.detections[i]) {
        json dj = {{"box", box_json(d.box)}, {"class_label", d.class_label},
                   {"confidence", d.confidence}};
        dj["instance_id"] = d.instance_id ? json(*d.instance_id) : json(nullptr);
        if (d.depth_stats) {
          dj["depth"] = {{"median", d.depth_stats->median_rel_depth},
                         {"mean", d.depth_stats->mean_rel_depth}};
        }
        dets.push_back(std::move(dj));
      }
    }
    json kj = {{"ordinal", i},
               {"frame_index", k.frame_index},
               {"timestamp", k.timestamp},
               {"reason", std::string(to_string(k.reason))},
               {"rgb", fmt::format("kf_{}_rgb.png", i)},
               {"detections", dets}};
    kj["bev"] = e.bev_images.empty() ? json(nullptr) : json(fmt::format("kf_{}_bev.png", i));
    kfs.push_back(std::move(kj));
  }
  json tracks = json::array();
  for (const Track& t : e.tracks) {
    json obs = json::array();
    for (const auto& [ord, idx] : t.observations) obs.push_back({ord, idx});
    tracks.push_back({{"instance_id", t.instance_id}, {"class_label", t.class_label},
                      {"observations", obs}});
  }
  json contacts = json::array();
  for (const ContactTransition& c : e.contacts) {
    contacts.push_back({{"from", c.from_keyframe}, {"to", c.to_keyframe},
                        {"label", std::string(to_string(c.label))},
                        {"delta_iou", c.delta_iou}, {"delta_dist", c.delta_dist},
                        {"flag", std::string(to_string(c.flag))}});
  }
  json graphs = json::array();
  for (const SceneGraph& g : e.local_graphs) {
    json nodes = json::array();
    for (const SceneNode& n : g.nodes) {
      nodes.push_back({{"instance_id", n.instance_id}, {"class_label", n.class_label},
                       {"centroid", {n.centroid.x, n.centroid.y, n.centroid.z}}});
    }
    json edges = json::array();
    for (const SceneEdge& s : g.edges) edges.push_back(edge_json(s));
    graphs.push_back({{"keyframe", g.keyframe_ordinal}, {"nodes", nodes}, {"edges", edges}});
  }
  json global = json::array();
  for (const PersistentEdge& p : e.global_graph.edges) {
    json ej = edge_json(p.edge);
    ej["persistence"] = p.persistence;
    global.push_back(std::move(ej));
  }
  json doc = {{"meta",
               {{"frame_count", e.meta.frame_count},
                {"width", e.meta.width},
                {"height", e.meta.height},
                {"fps", e.meta.fps},
                {"source_id", e.meta.source_id}}},
              {"robot", json::parse(robot_profile_json(e.robot))},
              {"keyframes", kfs},
              {"tracks", tracks},
              {"contacts", contacts},
              {"local_graphs", graphs},
              {"global_edges", global},
              {"bev_enabled", !e.bev_images.empty()}};
  doc["plan"] = e.plan_steps ? json(*e.plan_steps) : json(nullptr);
  return doc.dump(2) + "\n";
}

}  // namespace kite
