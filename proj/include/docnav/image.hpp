#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace docnav {

// Plain 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width*height*3

  Image() = default;
  Image(int w, int h, std::uint8_t r = 255, std::uint8_t g = 255, std::uint8_t b = 255);

  bool empty() const { return width == 0 || height == 0; }
  std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  void fill_rect(int x, int y, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  // Copies src onto this image with its top-left corner at (x, y); clips at borders.
  void blit(const Image& src, int x, int y);

  bool operator==(const Image& other) const = default;
};

// Area-averaging (box) downsample to exactly (w, h). Deterministic across
// platforms: plain double accumulation in a fixed order.
Image resize_area(const Image& src, int w, int h);

// Dimensions that fit (w, h) into (max_w, max_h) preserving aspect ratio,
// never upsampling. Result is at least 1x1.
std::pair<int, int> fit_within(int w, int h, int max_w, int max_h);

// 5x7 bitmap font, ASCII 0x20..0x7E. Each glyph cell occupies 6*scale x
// 8*scale pixels (one blank column/row of padding).
void draw_text(Image& img, int x, int y, const std::string& text, int scale,
               std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0);
int text_width(const std::string& text, int scale);
int text_height(int scale);

}  // namespace docnav
