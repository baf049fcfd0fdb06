#include <algorithm>
#include <tuple>

#include "kite/perception.hpp"

namespace kite {

TrackingResult link_tracks(std::vector<DetectionSet> per_keyframe, const TrackingParams& params) {
  TrackingResult result;
  int next_id = 1;

  for (std::size_t k = 0; k < per_keyframe.size(); ++k) {
    DetectionSet& cur = per_keyframe[k];
    for (Detection& d : cur) d.instance_id.reset();

    if (k > 0) {
      const DetectionSet& prev = per_keyframe[k - 1];
      struct Pair {
        double iou;
        double confidence_product;
        int prev_id;
        std::size_t prev_index;
        std::size_t cur_index;
      };
      std::vector<Pair> pairs;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        for (std::size_t j = 0; j < cur.size(); ++j) {
          if (prev[i].class_label != cur[j].class_label) continue;
          const double o = iou(prev[i].box, cur[j].box);
          if (o < params.iou_floor) continue;
          pairs.push_back({o, prev[i].confidence * cur[j].confidence, *prev[i].instance_id, i, j});
        }
      }
      std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(b.iou, b.confidence_product, a.prev_id, a.cur_index) <
               std::tie(a.iou, a.confidence_product, b.prev_id, b.cur_index);
      });
      std::vector<bool> prev_used(prev.size(), false);
      for (const Pair& p : pairs) {
        if (prev_used[p.prev_index] || cur[p.cur_index].instance_id) continue;
        prev_used[p.prev_index] = true;
        cur[p.cur_index].instance_id = p.prev_id;
      }
    }

    for (Detection& d : cur) {
      if (!d.instance_id) d.instance_id = next_id++;
    }
  }

  result.tracks.resize(static_cast<std::size_t>(next_id - 1));
  for (std::size_t k = 0; k < per_keyframe.size(); ++k) {
    for (std::size_t j = 0; j < per_keyframe[k].size(); ++j) {
      const Detection& d = per_keyframe[k][j];
      Track& t = result.tracks[static_cast<std::size_t>(*d.instance_id - 1)];
      t.instance_id = *d.instance_id;
      t.class_label = d.class_label;
      t.observations[static_cast<int>(k)] = j;
    }
  }
  result.detections = std::move(per_keyframe);
  return result;
}

}  // namespace kite
