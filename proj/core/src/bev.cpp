#include "kite/bev.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kite/codec.hpp"
#include "kite/draw.hpp"
#include "kite/error.hpp"

namespace kite {

namespace {

constexpr const char* kModule = "bev-render";
constexpr int kStoryboardCell = 256;
constexpr Rgb kAxisColor{0, 0, 0};
constexpr Rgb kGridColor{96, 96, 96};

int round_to_int(double v) { return static_cast<int>(std::lround(v)); }

void draw_axes(RgbImage& img, const BevSpec& spec) {
  const int lo = spec.margin / 2;
  const int hi = spec.canvas_size - 1 - spec.margin / 2;
  const int head = std::max(3, spec.margin / 5);
  // X: along the bottom, pointing right.
  draw_line(img, lo, hi, hi, hi, kAxisColor);
  draw_line(img, hi, hi, hi - head, hi - head, kAxisColor);
  draw_line(img, hi, hi, hi - head, hi + head, kAxisColor);
  draw_text(img, hi - text_width("X") - 1, hi + 2, "X", kAxisColor);
  // Z: along the left, pointing up (farther).
  draw_line(img, lo, hi, lo, lo, kAxisColor);
  draw_line(img, lo, lo, lo - head, lo + head, kAxisColor);
  draw_line(img, lo, lo, lo + head, lo + head, kAxisColor);
  draw_text(img, 1, lo + head + 2, "Z", kAxisColor);
}

RgbImage fit_cell(const RgbImage& img) {
  if (img.width() == kStoryboardCell && img.height() == kStoryboardCell) return img;
  if (img.width() == 2 * kStoryboardCell && img.height() == 2 * kStoryboardCell) {
    return downsample_2x(img);
  }
  return resize_area(img, kStoryboardCell, kStoryboardCell);
}

}  // namespace

void validate(const BevSpec& spec) {
  if (!(spec.r_min > 0 && spec.r_min < spec.r_max)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("need 0 < r_min < r_max, got [{}, {}]", spec.r_min, spec.r_max));
  }
  if (spec.margin < 0 || spec.canvas_size - 1 - 2 * spec.margin <= 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("margin {} leaves no room on a {} canvas", spec.margin,
                            spec.canvas_size));
  }
}

int radius_for_confidence(double confidence, const BevSpec& spec) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw Error(ErrorCode::kConfidenceRange, kModule,
                fmt::format("confidence {} outside [0,1]", confidence));
  }
  return std::clamp(round_to_int(confidence * spec.r_max), spec.r_min, spec.r_max);
}

CanvasPoint project_to_canvas(double pixel_cx, double z, const BevSpec& spec) {
  const double span = spec.canvas_size - 1 - 2 * spec.margin;
  const double cx = std::clamp(pixel_cx, 0.0, static_cast<double>(kKeyframeSize));
  const double zz = std::clamp(z, 0.0, 1.0);
  return {spec.margin + round_to_int(cx / kKeyframeSize * span),
          spec.margin + round_to_int((1.0 - zz) * span)};
}

CanvasPoint project_to_canvas(const SceneNode& node, const BevSpec& spec) {
  return project_to_canvas(node.pixel_cx, node.centroid.z, spec);
}

RgbImage render_bev_image(const SceneGraph& graph, double timestamp, int keyframe_ordinal,
                          const BevSpec& spec) {
  validate(spec);
  RgbImage img(spec.canvas_size, spec.canvas_size, kWhite);
  draw_axes(img, spec);

  std::vector<const SceneNode*> nodes;
  for (const SceneNode& n : graph.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](const SceneNode* a, const SceneNode* b) {
    return a->instance_id < b->instance_id;
  });
  for (const SceneNode* n : nodes) {
    const CanvasPoint p = project_to_canvas(*n, spec);
    const int r = radius_for_confidence(std::clamp(n->confidence, 0.0, 1.0), spec);
    fill_circle(img, p.u, p.v, r, palette_color(n->instance_id));
    draw_text(img, p.u + r + 2, p.v - text_height() / 2,
              fmt::format("{}#{}", n->class_label, n->instance_id), kBlack);
  }

  draw_text(img, spec.margin / 2 + 8, 2,
            fmt::format("KF {} @ {:.2f}s", keyframe_ordinal, timestamp), kBlack);
  return img;
}

PngBytes render_bev(const SceneGraph& graph, double timestamp, int keyframe_ordinal,
                    const BevSpec& spec) {
  return encode_png(render_bev_image(graph, timestamp, keyframe_ordinal, spec));
}

RgbImage overlay_keyframe(const Keyframe& keyframe, const DetectionSet& detections,
                          int keyframe_ordinal) {
  constexpr int kScale = 2;
  RgbImage img = keyframe.image;
  for (const Detection& d : detections) {
    const int id = d.instance_id.value_or(0);
    const Rgb color = palette_color(id);
    const int x0 = static_cast<int>(std::floor(d.box.x_min));
    const int y0 = static_cast<int>(std::floor(d.box.y_min));
    const int x1 = static_cast<int>(std::ceil(d.box.x_max)) - 1;
    const int y1 = static_cast<int>(std::ceil(d.box.y_max)) - 1;
    draw_rect(img, x0, y0, x1, y1, color, 2);

    const std::string label = fmt::format("{}#{} {:.2f}", d.class_label, id, d.confidence);
    const int th = text_height(kScale);
    const int ty = y0 - th - 2 >= 0 ? y0 - th - 2 : y0 + 2;
    fill_rect(img, x0, ty - 1, x0 + text_width(label, kScale) + 1, ty + th, color);
    draw_text(img, x0 + 1, ty, label, kWhite, kScale);
  }
  const std::string caption = fmt::format("KF {} @ {:.2f}s  frame {}", keyframe_ordinal,
                                          keyframe.timestamp, keyframe.frame_index);
  fill_rect(img, 0, 0, text_width(caption, kScale) + 7, text_height(kScale) + 5, kBlack);
  draw_text(img, 4, 3, caption, kWhite, kScale);
  return img;
}

RgbImage render_storyboard_image(std::span<const RgbImage> overlays,
                                 std::span<const RgbImage> bevs) {
  if (overlays.size() != bevs.size()) {
    throw Error(ErrorCode::kCountMismatch, kModule,
                fmt::format("{} RGB overlays but {} BEVs", overlays.size(), bevs.size()));
  }
  if (overlays.empty()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "storyboard needs at least one keyframe");
  }
  const int cols = static_cast<int>(overlays.size());
  RgbImage board(cols * kStoryboardCell, 2 * kStoryboardCell, kWhite);
  for (int c = 0; c < cols; ++c) {
    blit(board, fit_cell(overlays[static_cast<std::size_t>(c)]), c * kStoryboardCell, 0);
    blit(board, fit_cell(bevs[static_cast<std::size_t>(c)]), c * kStoryboardCell, kStoryboardCell);
  }
  for (int c = 1; c < cols; ++c) {
    draw_line(board, c * kStoryboardCell, 0, c * kStoryboardCell, board.height() - 1, kGridColor);
  }
  draw_line(board, 0, kStoryboardCell, board.width() - 1, kStoryboardCell, kGridColor);
  return board;
}

PngBytes render_storyboard(std::span<const RgbImage> overlays, std::span<const RgbImage> bevs) {
  return encode_png(render_storyboard_image(overlays, bevs));
}

RgbImage render_filmstrip_image(std::span<const RgbImage> overlays) {
  if (overlays.empty()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "filmstrip needs at least one keyframe");
  }
  const int cols = static_cast<int>(overlays.size());
  RgbImage strip(cols * kStoryboardCell, kStoryboardCell, kWhite);
  for (int c = 0; c < cols; ++c) {
    blit(strip, fit_cell(overlays[static_cast<std::size_t>(c)]), c * kStoryboardCell, 0);
  }
  for (int c = 1; c < cols; ++c) {
    draw_line(strip, c * kStoryboardCell, 0, c * kStoryboardCell, strip.height() - 1, kGridColor);
  }
  return strip;
}

}  // namespace kite
