#include "kite/draw.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

#include "bitmap_font.hpp"

namespace kite {

void fill_rect(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width() - 1);
  y1 = std::min(y1, img.height() - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) img.set(x, y, color);
  }
}

void draw_rect(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int thickness) {
  for (int t = 0; t < thickness; ++t) {
    const int l = x0 + t, r = x1 - t, top = y0 + t, bot = y1 - t;
    if (l > r || top > bot) break;
    draw_line(img, l, top, r, top, color);
    draw_line(img, l, bot, r, bot, color);
    draw_line(img, l, top, l, bot, color);
    draw_line(img, r, top, r, bot, color);
  }
}

void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.plot(x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void fill_circle(RgbImage& img, int cx, int cy, int radius, Rgb color) {
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= r2) img.plot(cx + dx, cy + dy, color);
    }
  }
}

void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color, int scale) {
  using detail::kGlyphHeight;
  using detail::kGlyphWidth;
  int pen = x;
  for (unsigned char ch : text) {
    if (ch < 0x20 || ch > 0x7E) ch = '?';
    const auto& glyph = detail::kGlyphs[ch - 0x20];
    for (int row = 0; row < kGlyphHeight; ++row) {
      for (int col = 0; col < kGlyphWidth; ++col) {
        if ((glyph[row] >> (kGlyphWidth - 1 - col)) & 1) {
          for (int sy = 0; sy < scale; ++sy) {
            for (int sx = 0; sx < scale; ++sx) {
              img.plot(pen + col * scale + sx, y + row * scale + sy, color);
            }
          }
        }
      }
    }
    pen += kGlyphWidth * scale;
  }
}

int text_width(std::string_view text, int scale) {
  return static_cast<int>(text.size()) * detail::kGlyphWidth * scale;
}

int text_height(int scale) { return detail::kGlyphHeight * scale; }

Rgb palette_color(int instance_id) {
  static constexpr std::array<Rgb, 10> kPalette = {{
      {31, 119, 180},
      {255, 127, 14},
      {44, 160, 44},
      {214, 39, 40},
      {148, 103, 189},
      {140, 86, 75},
      {227, 119, 194},
      {127, 127, 127},
      {188, 189, 34},
      {23, 190, 207},
  }};
  const int i = ((instance_id % 10) + 10) % 10;
  return kPalette[static_cast<std::size_t>(i)];
}

}  // namespace kite
