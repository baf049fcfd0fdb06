#include "kite/perception.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "kite/error.hpp"

namespace kite {

namespace {

constexpr const char* kModule = "perception";

void require_keyframe_size(const Keyframe& kf) {
  if (kf.image.width() != kKeyframeSize || kf.image.height() != kKeyframeSize) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("keyframe {} is {}x{}, expected {}x{}", kf.frame_index,
                            kf.image.width(), kf.image.height(), kKeyframeSize, kKeyframeSize));
  }
}

DepthRaster resample_nearest(const DepthRaster& src, int width, int height) {
  DepthRaster out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(src.height - 1, static_cast<int>((y + 0.5) * src.height / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(src.width - 1, static_cast<int>((x + 0.5) * src.width / width));
      out.at(x, y) = src.at(sx, sy);
    }
  }
  return out;
}

}  // namespace

DetectionSet postprocess_detections(std::vector<RawDetection> raw,
                                    std::span<const std::string> vocabulary) {
  constexpr double kSize = kKeyframeSize;
  DetectionSet out;
  for (RawDetection& r : raw) {
    if (!vocabulary.empty() &&
        std::find(vocabulary.begin(), vocabulary.end(), r.label) == vocabulary.end()) {
      continue;
    }
    Box b{std::clamp(std::min(r.box[0], r.box[2]), 0.0, kSize),
          std::clamp(std::min(r.box[1], r.box[3]), 0.0, kSize),
          std::clamp(std::max(r.box[0], r.box[2]), 0.0, kSize),
          std::clamp(std::max(r.box[1], r.box[3]), 0.0, kSize)};
    if (!(b.x_min < b.x_max && b.y_min < b.y_max)) continue;
    out.push_back({b, std::move(r.label), std::clamp(r.score, 0.0, 1.0), std::nullopt,
                   std::nullopt});
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return a.confidence > b.confidence;
  });
  if (out.size() > kMaxDetectionsPerKeyframe) out.resize(kMaxDetectionsPerKeyframe);
  return out;
}

DetectionSet detect(DetectionBackend& backend, std::span<const std::string> vocabulary,
                    const Keyframe& keyframe) {
  require_keyframe_size(keyframe);
  return postprocess_detections(
      backend.detect(keyframe, vocabulary, static_cast<int>(kMaxDetectionsPerKeyframe)),
      vocabulary);
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "quantile of an empty sample");
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("quantile must be in (0,1], got {}", q));
  }
  const auto n = values.size();
  // The epsilon keeps exact products like 0.8 * 10 from rounding up a rank.
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

DepthRaster normalize_depth(DepthRaster raw, double clamp_quantile) {
  if (raw.values.empty()) return raw;
  const double cap = nearest_rank_quantile(raw.values, clamp_quantile);
  double lo = cap;
  for (double& v : raw.values) {
    v = std::min(v, cap);
    lo = std::min(lo, v);
  }
  const double range = cap - lo;
  for (double& v : raw.values) v = range > 0.0 ? (v - lo) / range : 0.5;
  return raw;
}

DepthRaster estimate_depth(DepthBackend& backend, const Keyframe& keyframe,
                           double clamp_quantile) {
  require_keyframe_size(keyframe);
  DepthRaster raw = backend.estimate(keyframe);
  if (raw.width <= 0 || raw.height <= 0 ||
      raw.values.size() != static_cast<std::size_t>(raw.width) * raw.height) {
    throw Error(ErrorCode::kBackendMalformed, kModule, "depth raster is empty or inconsistent");
  }
  if (!std::all_of(raw.values.begin(), raw.values.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::kBackendMalformed, kModule, "depth raster has non-finite values");
  }
  if (raw.width != kKeyframeSize || raw.height != kKeyframeSize) {
    raw = resample_nearest(raw, kKeyframeSize, kKeyframeSize);
  }
  return normalize_depth(std::move(raw), clamp_quantile);
}

DepthStats depth_stats_in_box(const DepthRaster& depth, const Box& box) {
  const int x0 = std::clamp(static_cast<int>(std::floor(box.x_min)), 0, depth.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(box.y_min)), 0, depth.height - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.x_max)), x0 + 1, depth.width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.y_max)), y0 + 1, depth.height);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(x1 - x0) * (y1 - y0));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) vals.push_back(depth.at(x, y));
  }
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
  const std::size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
  double median = vals[mid];
  if (vals.size() % 2 == 0) {
    const double lower = *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return {median, mean};
}

DetectionSet attach_depth_stats(DetectionSet detections, const DepthRaster& depth) {
  if (depth.width <= 0 || depth.height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "empty depth raster");
  }
  for (Detection& d : detections) d.depth_stats = depth_stats_in_box(depth, d.box);
  return detections;
}

PerceptionOutput perceive_keyframes(std::span<const Keyframe> keyframes,
                                    DetectionBackend& detector, DepthBackend& depth,
                                    std::span<const std::string> vocabulary,
                                    double clamp_quantile, int parallelism) {
  PerceptionOutput out;
  out.detections.resize(keyframes.size());
  out.depth.resize(keyframes.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t k = next++;
      if (k >= keyframes.size()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        DepthRaster d = estimate_depth(depth, keyframes[k], clamp_quantile);
        out.detections[k] = attach_depth_stats(detect(detector, vocabulary, keyframes[k]), d);
        out.depth[k] = std::move(d);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const int n_threads =
      std::clamp(parallelism, 1, std::max(1, static_cast<int>(keyframes.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace kite
