#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "kite/backend.hpp"
#include "kite/model.hpp"

namespace kite {

struct DetectionBackendRef {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint_or_path;
  std::vector<std::string> vocabulary;  // object and gripper classes
  RetryPolicy retry;
  double timeout_s = 30.0;
};

struct DepthBackendRef {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint_or_path;
  double clamp_quantile = 0.8;
  RetryPolicy retry;
  double timeout_s = 30.0;
};

/// A detection as it appears on the wire, before clipping and capping.
struct RawDetection {
  std::array<double, 4> box{};  // x0, y0, x1, y1
  std::string label;
  double score = 0.0;
};

class DetectionBackend {
 public:
  virtual ~DetectionBackend() = default;
  virtual std::vector<RawDetection> detect(const Keyframe& keyframe,
                                           std::span<const std::string> vocabulary,
                                           int max_detections) = 0;
};

/// Returns raw relative depth (arbitrary scale) at keyframe resolution.
class DepthBackend {
 public:
  virtual ~DepthBackend() = default;
  virtual DepthRaster estimate(const Keyframe& keyframe) = 0;
};

/// Scripted detections keyed by frame index, with a fallback script.
/// Thread-safe; counts every call.
class MockDetectionBackend final : public DetectionBackend {
 public:
  MockDetectionBackend() = default;
  /// Loads `{"default": {"detections": [...]}, "frames": {"<i>": {"detections": [...]}}}`.
  static std::unique_ptr<MockDetectionBackend> from_script_file(const std::filesystem::path& p);

  void script(int frame_index, std::vector<RawDetection> detections);
  void script_default(std::vector<RawDetection> detections);
  int calls() const noexcept { return calls_.load(); }

  std::vector<RawDetection> detect(const Keyframe& keyframe, std::span<const std::string> vocabulary,
                                   int max_detections) override;

 private:
  mutable std::mutex mutex_;
  std::map<int, std::vector<RawDetection>> scripted_;
  std::vector<RawDetection> fallback_;
  std::atomic<int> calls_{0};
};

/// Depth from a generator (default: vertical ramp, far at the top). Thread-safe.
class MockDepthBackend final : public DepthBackend {
 public:
  using Generator = std::function<DepthRaster(const Keyframe&)>;
  MockDepthBackend();
  explicit MockDepthBackend(Generator generator);

  int calls() const noexcept { return calls_.load(); }
  DepthRaster estimate(const Keyframe& keyframe) override;

 private:
  Generator generator_;
  std::atomic<int> calls_{0};
};

/// Precomputed records: `<frame_index>.det.json` (wire response schema) and
/// `<frame_index>.depth.png` (16-bit grayscale, value / 65535).
class DirectoryDetectionBackend final : public DetectionBackend {
 public:
  explicit DirectoryDetectionBackend(std::filesystem::path dir);
  std::vector<RawDetection> detect(const Keyframe& keyframe, std::span<const std::string> vocabulary,
                                   int max_detections) override;

 private:
  std::filesystem::path dir_;
};

class DirectoryDepthBackend final : public DepthBackend {
 public:
  explicit DirectoryDepthBackend(std::filesystem::path dir);
  DepthRaster estimate(const Keyframe& keyframe) override;

 private:
  std::filesystem::path dir_;
};

/// POST <endpoint>/detect with {image, vocabulary, max_detections}.
class HttpDetectionBackend final : public DetectionBackend {
 public:
  HttpDetectionBackend(std::string endpoint, RetryPolicy retry, double timeout_s);
  std::vector<RawDetection> detect(const Keyframe& keyframe, std::span<const std::string> vocabulary,
                                   int max_detections) override;

 private:
  std::string endpoint_;
  RetryPolicy retry_;
  double timeout_s_;
};

/// POST <endpoint>/depth with {image}; response {depth_png16}.
class HttpDepthBackend final : public DepthBackend {
 public:
  HttpDepthBackend(std::string endpoint, RetryPolicy retry, double timeout_s);
  DepthRaster estimate(const Keyframe& keyframe) override;

 private:
  std::string endpoint_;
  RetryPolicy retry_;
  double timeout_s_;
};

std::unique_ptr<DetectionBackend> make_detection_backend(const DetectionBackendRef& ref);
std::unique_ptr<DepthBackend> make_depth_backend(const DepthBackendRef& ref);

/// Parses the wire response `{detections: [{box, label, score}]}`.
/// Errors: kBackendMalformed.
std::vector<RawDetection> parse_detection_response(std::string_view json_text);
std::string detection_response_json(std::span<const RawDetection> detections);

/// Filters to the vocabulary (when non-empty), clips boxes to the keyframe,
/// drops degenerate boxes, keeps the five most confident (stable order).
DetectionSet postprocess_detections(std::vector<RawDetection> raw,
                                    std::span<const std::string> vocabulary);

/// Runs the backend and post-processes. Errors: kInvalidArgument for a
/// non-512 keyframe, plus whatever the backend raises.
DetectionSet detect(DetectionBackend& backend, std::span<const std::string> vocabulary,
                    const Keyframe& keyframe);

/// Nearest-rank quantile: the value at 1-based rank ceil(q * N) in sorted order.
double nearest_rank_quantile(std::vector<double> values, double q);

/// Clamps values above the q-quantile to it, then min-max normalizes to
/// [0,1]. Constant rasters map to 0.5.
DepthRaster normalize_depth(DepthRaster raw, double clamp_quantile);

/// Runs the backend, resamples to the keyframe size if needed, normalizes.
DepthRaster estimate_depth(DepthBackend& backend, const Keyframe& keyframe,
                           double clamp_quantile);

/// Pixels covered by a box: columns [floor(x_min), ceil(x_max)) and rows
/// likewise, clipped to the raster.
DepthStats depth_stats_in_box(const DepthRaster& depth, const Box& box);
DetectionSet attach_depth_stats(DetectionSet detections, const DepthRaster& depth);

struct TrackingParams {
  double iou_floor = 0.3;
};

struct TrackingResult {
  std::vector<DetectionSet> detections;  // with instance_id assigned
  TrackSet tracks;
};

/// Greedy consecutive-keyframe association. Pairs need equal class labels
/// and IoU >= floor; accepted by descending IoU, then higher confidence
/// product, then lower instance id. Unmatched detections open new tracks,
/// numbered from 1 in order of first appearance.
TrackingResult link_tracks(std::vector<DetectionSet> per_keyframe,
                           const TrackingParams& params = {});

struct PerceptionOutput {
  std::vector<DetectionSet> detections;  // post-processed, depth stats attached
  std::vector<DepthRaster> depth;        // normalized
};

/// Detection and depth for every keyframe, at most `parallelism` keyframes
/// in flight at once. The first failure is rethrown after all workers stop.
PerceptionOutput perceive_keyframes(std::span<const Keyframe> keyframes,
                                    DetectionBackend& detector, DepthBackend& depth,
                                    std::span<const std::string> vocabulary,
                                    double clamp_quantile, int parallelism = 4);

}  // namespace kite
