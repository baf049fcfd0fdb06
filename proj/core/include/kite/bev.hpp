#pragma once

#include <span>

#include "kite/model.hpp"

namespace kite {

/// Pseudo-BEV layout: white square canvas, X to the right along the bottom,
/// Z (relative depth, farther = up) along the left edge.
struct BevSpec {
  int canvas_size = 256;
  int r_min = 3;
  int r_max = 10;
  int margin = 24;
};

/// Throws Error(kInvalidArgument) unless 0 < r_min < r_max and the margin
/// leaves a drawable area.
void validate(const BevSpec& spec);

/// clamp(round(s * r_max), r_min, r_max). Errors: kConfidenceRange.
int radius_for_confidence(double confidence, const BevSpec& spec = {});

struct CanvasPoint {
  int u = 0;
  int v = 0;

  friend bool operator==(const CanvasPoint&, const CanvasPoint&) = default;
};

/// u = margin + round(cx / 512 * (size - 1 - 2 margin)),
/// v = margin + round((1 - z) * (size - 1 - 2 margin)). Inputs are clamped
/// to cx in [0, 512], z in [0, 1].
CanvasPoint project_to_canvas(double pixel_cx, double z, const BevSpec& spec = {});
CanvasPoint project_to_canvas(const SceneNode& node, const BevSpec& spec = {});

/// Axes, one disc per node (ascending instance id) labelled `<class>#<id>`,
/// and the caption `KF <ordinal> @ <t>s`. Scene edges are not drawn.
RgbImage render_bev_image(const SceneGraph& graph, double timestamp, int keyframe_ordinal,
                          const BevSpec& spec = {});
PngBytes render_bev(const SceneGraph& graph, double timestamp, int keyframe_ordinal,
                    const BevSpec& spec = {});

/// Copy of the keyframe with boxes, `<class>#<id> <s>` labels and a
/// timestamp caption. Colors come from palette_color(instance id).
RgbImage overlay_keyframe(const Keyframe& keyframe, const DetectionSet& detections,
                          int keyframe_ordinal);

/// Two-row montage: RGB overlays on top, BEVs below, one column per
/// keyframe in time order. Errors: kCountMismatch, kInvalidArgument (empty).
RgbImage render_storyboard_image(std::span<const RgbImage> overlays, std::span<const RgbImage> bevs);
PngBytes render_storyboard(std::span<const RgbImage> overlays, std::span<const RgbImage> bevs);

/// Single-row montage of RGB overlays, used when pseudo-BEVs are disabled.
RgbImage render_filmstrip_image(std::span<const RgbImage> overlays);

}  // namespace kite
