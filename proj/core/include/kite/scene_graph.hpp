#pragma once

#include <span>
#include <string>
#include <vector>

#include "kite/model.hpp"

namespace kite {

/// Pinhole-style camera used only for relative scaling.
struct CameraModel {
  double focal_px = kKeyframeSize;
  double principal_x = kKeyframeSize / 2.0;
  double principal_y = kKeyframeSize / 2.0;
  double epsilon = 0.1;  // keeps x, y from collapsing at z = 0
};

inline constexpr double kDefaultRelationTolerance = 0.05;

/// z = median relative depth; x, y = (center - principal) / focal * (z + eps).
/// Errors: kMissingDepth.
Vec3 backproject_centroid(const Detection& detection, const CameraModel& camera = {});

/// Relations asserted from a toward b: LEFT_OF iff a.x < b.x - tol, ABOVE iff
/// a.y < b.y - tol (image Y points down), IN_FRONT_OF iff a.z < b.z - tol.
std::vector<Relation> pairwise_relations(const SceneNode& a, const SceneNode& b,
                                         double tol = kDefaultRelationTolerance);

/// Nodes for every detection and edges for every ordered pair. Detections
/// must carry instance ids (kInvalidArgument) and depth stats (kMissingDepth).
SceneGraph build_local_graph(std::span<const Detection> detections, int keyframe_ordinal,
                             const CameraModel& camera = {},
                             double tol = kDefaultRelationTolerance);

/// One node per track; each edge's persistence is the number of local
/// graphs containing it. Edges never observed are absent.
GlobalSceneGraph aggregate_global(std::span<const SceneGraph> local_graphs, const TrackSet& tracks);

/// Debug export: `{"nodes": [...], "keyframes": [...], "edges": [...]}`.
std::string scene_graph_json(const GlobalSceneGraph& global, std::span<const SceneGraph> local);

}  // namespace kite
