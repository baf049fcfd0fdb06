#include "kite/scene_graph.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "json.hpp"
#include "kite/error.hpp"

namespace kite {

namespace {
constexpr const char* kModule = "scene-graph";
}

Vec3 backproject_centroid(const Detection& detection, const CameraModel& camera) {
  if (!detection.depth_stats) {
    throw Error(ErrorCode::kMissingDepth, kModule,
                fmt::format("detection '{}' has no depth statistics", detection.class_label));
  }
  const double z = detection.depth_stats->median_rel_depth;
  const double scale = (z + camera.epsilon) / camera.focal_px;
  return {(detection.box.center_x() - camera.principal_x) * scale,
          (detection.box.center_y() - camera.principal_y) * scale, z};
}

std::vector<Relation> pairwise_relations(const SceneNode& a, const SceneNode& b, double tol) {
  std::vector<Relation> out;
  if (a.centroid.x < b.centroid.x - tol) out.push_back(Relation::kLeftOf);
  if (a.centroid.y < b.centroid.y - tol) out.push_back(Relation::kAbove);
  if (a.centroid.z < b.centroid.z - tol) out.push_back(Relation::kInFrontOf);
  return out;
}

SceneGraph build_local_graph(std::span<const Detection> detections, int keyframe_ordinal,
                             const CameraModel& camera, double tol) {
  SceneGraph g;
  g.keyframe_ordinal = keyframe_ordinal;
  for (const Detection& d : detections) {
    if (!d.instance_id) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  fmt::format("detection '{}' in keyframe {} is not tracked", d.class_label,
                              keyframe_ordinal));
    }
    g.nodes.push_back({*d.instance_id, d.class_label, backproject_centroid(d, camera),
                       d.box.center_x(), d.box.center_y(), d.confidence});
  }
  for (const SceneNode& a : g.nodes) {
    for (const SceneNode& b : g.nodes) {
      if (a.instance_id == b.instance_id) continue;
      for (Relation r : pairwise_relations(a, b, tol)) {
        g.edges.push_back({a.instance_id, r, b.instance_id});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

GlobalSceneGraph aggregate_global(std::span<const SceneGraph> local_graphs, const TrackSet& tracks) {
  GlobalSceneGraph global;
  global.keyframe_count = static_cast<int>(local_graphs.size());
  for (const Track& t : tracks) global.nodes.push_back({t.instance_id, t.class_label});
  std::map<SceneEdge, int> counts;
  for (const SceneGraph& g : local_graphs) {
    global.keyframe_edges.push_back(g.edges);
    for (const SceneEdge& e : g.edges) ++counts[e];
  }
  for (const auto& [edge, n] : counts) global.edges.push_back({edge, n});
  return global;
}

std::string scene_graph_json(const GlobalSceneGraph& global, std::span<const SceneGraph> local) {
  using nlohmann::json;
  auto edge_json = [](const SceneEdge& e) {
    return json{{"subject", e.subject_id},
                {"relation", std::string(to_string(e.relation))},
                {"object", e.object_id}};
  };
  json doc;
  doc["nodes"] = json::array();
  for (const GlobalNode& n : global.nodes) {
    doc["nodes"].push_back({{"id", n.instance_id}, {"class", n.class_label}});
  }
  doc["keyframes"] = json::array();
  for (const SceneGraph& g : local) {
    json kf = {{"ordinal", g.keyframe_ordinal}, {"nodes", json::array()}, {"edges", json::array()}};
    for (const SceneNode& n : g.nodes) {
      kf["nodes"].push_back({{"id", n.instance_id},
                             {"class", n.class_label},
                             {"centroid", {n.centroid.x, n.centroid.y, n.centroid.z}},
                             {"confidence", n.confidence}});
    }
    for (const SceneEdge& e : g.edges) kf["edges"].push_back(edge_json(e));
    doc["keyframes"].push_back(std::move(kf));
  }
  doc["edges"] = json::array();
  for (const PersistentEdge& e : global.edges) {
    json j = edge_json(e.edge);
    j["persistence"] = e.persistence;
    j["keyframes"] = global.keyframe_count;
    doc["edges"].push_back(std::move(j));
  }
  return doc.dump(2);
}

}  // namespace kite
