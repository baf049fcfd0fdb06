#include "kite/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <opencv2/imgproc.hpp>
#include <opencv2/video/tracking.hpp>

#include "kite/error.hpp"

namespace kite {

namespace {

constexpr const char* kModule = "saliency";

cv::Mat to_flow_gray(const RgbImage& img, int downscale) {
  const cv::Mat rgb(img.height(), img.width(), CV_8UC3,
                    const_cast<std::uint8_t*>(img.bytes().data()));
  cv::Mat gray;
  cv::cvtColor(rgb, gray, cv::COLOR_RGB2GRAY);
  const int long_side = std::max(img.width(), img.height());
  if (long_side > downscale) {
    const double s = static_cast<double>(downscale) / long_side;
    const int w = std::max(1, static_cast<int>(std::lround(img.width() * s)));
    const int h = std::max(1, static_cast<int>(std::lround(img.height() * s)));
    cv::Mat small;
    cv::resize(gray, small, cv::Size(w, h), 0, 0, cv::INTER_AREA);
    return small;
  }
  return gray;
}

FlowField flow_between(const cv::Mat& prev, const cv::Mat& next,
                       const KeyframeSelectionParams& params) {
  const FarnebackParams& fb = params.farneback;
  cv::Mat flow;
  cv::calcOpticalFlowFarneback(prev, next, flow, fb.pyramid_scale, fb.pyramid_levels,
                               fb.window_size, fb.iterations, fb.poly_n, fb.poly_sigma, 0);
  FlowField out;
  out.width = flow.cols;
  out.height = flow.rows;
  out.u.resize(static_cast<std::size_t>(flow.cols) * flow.rows);
  out.v.resize(out.u.size());
  std::size_t i = 0;
  for (int y = 0; y < flow.rows; ++y) {
    const auto* row = flow.ptr<cv::Vec2f>(y);
    for (int x = 0; x < flow.cols; ++x, ++i) {
      out.u[i] = row[x][0];
      out.v[i] = row[x][1];
    }
  }
  return out;
}

}  // namespace

void validate(const KeyframeSelectionParams& params) {
  if (params.budget < 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("budget must be >= 1, got {}", params.budget));
  }
  if (params.nms_window < 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("nms_window must be >= 1, got {}", params.nms_window));
  }
  if (params.downscale < 8) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("flow downscale must be >= 8, got {}", params.downscale));
  }
}

FlowField compute_flow(const RgbImage& prev, const RgbImage& next,
                       const KeyframeSelectionParams& params) {
  if (prev.width() != next.width() || prev.height() != next.height()) {
    throw Error(ErrorCode::kDimMismatch, kModule,
                fmt::format("frames are {}x{} and {}x{}", prev.width(), prev.height(),
                            next.width(), next.height()));
  }
  return flow_between(to_flow_gray(prev, params.downscale), to_flow_gray(next, params.downscale),
                      params);
}

double mean_flow_magnitude(const FlowField& field) {
  if (field.u.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < field.u.size(); ++i) {
    sum += std::hypot(static_cast<double>(field.u[i]), static_cast<double>(field.v[i]));
  }
  return sum / static_cast<double>(field.u.size());
}

SaliencyCurve saliency_series(int frame_count, const std::function<RgbImage(int)>& fetch,
                              const KeyframeSelectionParams& params) {
  validate(params);
  if (frame_count < 2) {
    throw Error(ErrorCode::kTooFewFrames, kModule,
                fmt::format("need at least 2 frames, got {}", frame_count));
  }
  SaliencyCurve curve;
  curve.frame_count = frame_count;
  curve.scores.reserve(static_cast<std::size_t>(frame_count - 1));
  RgbImage first = fetch(0);
  const int w = first.width(), h = first.height();
  cv::Mat prev = to_flow_gray(first, params.downscale);
  for (int t = 1; t < frame_count; ++t) {
    const RgbImage img = fetch(t);
    if (img.width() != w || img.height() != h) {
      throw Error(ErrorCode::kDimMismatch, kModule,
                  fmt::format("frame {} is {}x{}, expected {}x{}", t, img.width(),
                              img.height(), w, h));
    }
    cv::Mat next = to_flow_gray(img, params.downscale);
    curve.scores.push_back(mean_flow_magnitude(flow_between(prev, next, params)));
    prev = std::move(next);
  }
  return curve;
}

SaliencyCurve saliency_series(const FrameSource& src, const KeyframeSelectionParams& params) {
  return saliency_series(
      src.meta().frame_count, [&src](int i) { return src.read_frame(i).pixels; }, params);
}

std::vector<int> uniform_grid(int frame_count, int budget) {
  std::vector<int> grid;
  if (frame_count < 1 || budget < 1) return grid;
  if (budget == 1) return {(frame_count - 1) / 2};
  const double step = static_cast<double>(frame_count - 1) / (budget - 1);
  for (int j = 0; j < budget; ++j) {
    const int pos = static_cast<int>(std::lround(j * step));
    if (grid.empty() || grid.back() != pos) grid.push_back(pos);
  }
  return grid;
}

std::vector<SelectedFrame> select_keyframes(const SaliencyCurve& curve,
                                            const KeyframeSelectionParams& params) {
  validate(params);
  const int frames = curve.frame_count;
  if (frames < 2 || curve.scores.size() != static_cast<std::size_t>(frames - 1)) {
    throw Error(ErrorCode::kEmptyCurve, kModule,
                fmt::format("curve has {} scores for {} frames", curve.scores.size(), frames));
  }
  const int budget = params.budget;
  const int window = params.nms_window;
  const std::size_t target = static_cast<std::size_t>(std::min(budget, frames));

  std::vector<SelectedFrame> selected;
  if (params.mode == KeyframeMode::kUniform) {
    for (int f : uniform_grid(frames, budget)) {
      selected.push_back({f, SelectionReason::kUniformBackfill});
    }
    return selected;
  }

  // Strict local maxima over [t - window, t + window], clipped at the ends.
  const auto& s = curve.scores;
  const int n = static_cast<int>(s.size());
  std::vector<int> candidates;
  for (int t = 0; t < n; ++t) {
    if (!(s[t] > 0.0)) continue;
    bool is_peak = true;
    for (int o = std::max(0, t - window); o <= std::min(n - 1, t + window) && is_peak; ++o) {
      if (o != t && s[o] >= s[t]) is_peak = false;
    }
    if (is_peak) candidates.push_back(t);
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return s[a] != s[b] ? s[a] > s[b] : a < b;
  });

  auto near_selected = [&](int frame) {
    return std::any_of(selected.begin(), selected.end(), [&](const SelectedFrame& k) {
      return std::abs(k.frame_index - frame) <= window;
    });
  };
  auto contains = [&](int frame) {
    return std::any_of(selected.begin(), selected.end(),
                       [&](const SelectedFrame& k) { return k.frame_index == frame; });
  };

  for (int t : candidates) {
    if (selected.size() >= static_cast<std::size_t>(budget)) break;
    const int frame = t + 1;
    if (!near_selected(frame)) selected.push_back({frame, SelectionReason::kMotionPeak});
  }

  const std::vector<int> grid = uniform_grid(frames, budget);
  for (int pos : grid) {
    if (selected.size() >= target) break;
    if (!near_selected(pos)) selected.push_back({pos, SelectionReason::kUniformBackfill});
  }
  // The grid has min(M, T) distinct positions, so this pass always fills the budget.
  for (int pos : grid) {
    if (selected.size() >= target) break;
    if (!contains(pos)) selected.push_back({pos, SelectionReason::kUniformBackfill});
  }

  std::sort(selected.begin(), selected.end(),
            [](const SelectedFrame& a, const SelectedFrame& b) {
              return a.frame_index < b.frame_index;
            });
  return selected;
}

void write_saliency_csv(std::ostream& out, const SaliencyCurve& curve) {
  out << "frame_index,score\n";
  for (std::size_t t = 0; t < curve.scores.size(); ++t) {
    out << fmt::format("{},{:.6f}\n", t + 1, curve.scores[t]);
  }
}

}  // namespace kite
