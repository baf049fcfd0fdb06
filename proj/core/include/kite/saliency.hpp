#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "kite/ingest.hpp"
#include "kite/model.hpp"

namespace kite {

enum class FlowAlgorithm { kFarneback };

/// Keyframe policy. kUniform is the pure uniform-sampling ablation.
enum class KeyframeMode { kMotion, kUniform };

struct FarnebackParams {
  double pyramid_scale = 0.5;
  int pyramid_levels = 3;
  int window_size = 15;
  int iterations = 3;
  int poly_n = 5;
  double poly_sigma = 1.2;
};

struct KeyframeSelectionParams {
  int budget = kDefaultBudget;  // M
  int nms_window = 5;           // frames
  int downscale = 256;          // long side used for flow
  FlowAlgorithm flow_algorithm = FlowAlgorithm::kFarneback;
  FarnebackParams farneback;
  KeyframeMode mode = KeyframeMode::kMotion;
};

/// Throws Error(kInvalidArgument) when budget < 1, nms_window < 1 or downscale < 8.
void validate(const KeyframeSelectionParams& params);

/// Dense displacement field in pixels/frame at the (downscaled) flow resolution.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;
};

/// Errors: kDimMismatch when the frames differ in size.
FlowField compute_flow(const RgbImage& prev, const RgbImage& next,
                       const KeyframeSelectionParams& params);
inline FlowField compute_flow(const Frame& prev, const Frame& next,
                              const KeyframeSelectionParams& params) {
  return compute_flow(prev.pixels, next.pixels, params);
}

/// Mean over all pixels of sqrt(u^2 + v^2); 0 for an empty field.
double mean_flow_magnitude(const FlowField& field);

/// scores[t] is the mean flow magnitude between frames t and t+1 and is
/// attributed to frame t+1.
struct SaliencyCurve {
  std::vector<double> scores;
  int frame_count = 0;
};

/// Errors: kTooFewFrames when the source has fewer than two frames.
SaliencyCurve saliency_series(const FrameSource& src, const KeyframeSelectionParams& params);

/// Same as above over an arbitrary frame provider; `fetch(i)` returns frame i.
SaliencyCurve saliency_series(int frame_count, const std::function<RgbImage(int)>& fetch,
                              const KeyframeSelectionParams& params);

struct SelectedFrame {
  int frame_index = 0;
  SelectionReason reason = SelectionReason::kUniformBackfill;

  friend bool operator==(const SelectedFrame&, const SelectedFrame&) = default;
};

/// Grid positions round(j*(T-1)/(M-1)) for j = 0..M-1, deduplicated and
/// ascending. A budget of one yields the middle frame.
std::vector<int> uniform_grid(int frame_count, int budget);

/// Temporal-NMS peak picking with uniform backfill (or pure uniform
/// sampling in kUniform mode). Output is ascending, duplicate-free and has
/// length min(M, T). Errors: kEmptyCurve.
std::vector<SelectedFrame> select_keyframes(const SaliencyCurve& curve,
                                            const KeyframeSelectionParams& params);

/// CSV with header `frame_index,score`, one row per attributed frame.
void write_saliency_csv(std::ostream& out, const SaliencyCurve& curve);

}  // namespace kite
