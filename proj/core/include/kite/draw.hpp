#pragma once

#include <string_view>

#include "kite/image.hpp"

namespace kite {

// Aliasing-free raster primitives. Every primitive writes exact integer
// pixel sets so renders are reproducible byte-for-byte.

void fill_rect(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color);
/// Outline of [x0,x1]x[y0,y1] (inclusive) growing inward by `thickness`.
void draw_rect(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int thickness = 1);
/// Bresenham line, endpoints inclusive.
void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color);
/// Filled disc: every pixel with dx*dx + dy*dy <= r*r.
void fill_circle(RgbImage& img, int cx, int cy, int radius, Rgb color);

/// Built-in 6x11 bitmap font; non-printable bytes render as '?'.
void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color, int scale = 1);
int text_width(std::string_view text, int scale = 1);
int text_height(int scale = 1);

/// Fixed 10-entry palette indexed by instance id modulo 10.
Rgb palette_color(int instance_id);

}  // namespace kite
