#include "docnav/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace docnav {

Image::Image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("Image: non-positive dimensions");
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }
}

void Image::fill_rect(int x, int y, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int x0 = std::max(0, x), y0 = std::max(0, y);
  const int x1 = std::min(width, x + w), y1 = std::min(height, y + h);
  for (int py = y0; py < y1; ++py) {
    for (int px = x0; px < x1; ++px) {
      std::uint8_t* p = at(px, py);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  }
}

void Image::blit(const Image& src, int x, int y) {
  const int x0 = std::max(0, x), y0 = std::max(0, y);
  const int x1 = std::min(width, x + src.width), y1 = std::min(height, y + src.height);
  for (int py = y0; py < y1; ++py) {
    const std::uint8_t* s = src.at(x0 - x, py - y);
    std::uint8_t* d = at(x0, py);
    std::copy(s, s + 3 * (x1 - x0), d);
  }
}

Image resize_area(const Image& src, int w, int h) {
  if (src.empty()) throw std::invalid_argument("resize_area: empty source");
  if (w <= 0 || h <= 0) throw std::invalid_argument("resize_area: non-positive target");
  if (w == src.width && h == src.height) return src;

  Image dst(w, h);
  const double sx = static_cast<double>(src.width) / w;
  const double sy = static_cast<double>(src.height) / h;
  for (int oy = 0; oy < h; ++oy) {
    const double fy0 = oy * sy, fy1 = (oy + 1) * sy;
    const int iy0 = static_cast<int>(std::floor(fy0));
    const int iy1 = std::min(src.height, static_cast<int>(std::ceil(fy1)));
    for (int ox = 0; ox < w; ++ox) {
      const double fx0 = ox * sx, fx1 = (ox + 1) * sx;
      const int ix0 = static_cast<int>(std::floor(fx0));
      const int ix1 = std::min(src.width, static_cast<int>(std::ceil(fx1)));
      double acc[3] = {0, 0, 0};
      double area = 0;
      for (int iy = iy0; iy < iy1; ++iy) {
        const double wy = std::min(fy1, iy + 1.0) - std::max(fy0, static_cast<double>(iy));
        for (int ix = ix0; ix < ix1; ++ix) {
          const double wx = std::min(fx1, ix + 1.0) - std::max(fx0, static_cast<double>(ix));
          const double wgt = wx * wy;
          const std::uint8_t* p = src.at(ix, iy);
          acc[0] += wgt * p[0];
          acc[1] += wgt * p[1];
          acc[2] += wgt * p[2];
          area += wgt;
        }
      }
      std::uint8_t* q = dst.at(ox, oy);
      for (int c = 0; c < 3; ++c) {
        q[c] = static_cast<std::uint8_t>(std::lround(std::clamp(acc[c] / area, 0.0, 255.0)));
      }
    }
  }
  return dst;
}

std::pair<int, int> fit_within(int w, int h, int max_w, int max_h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("fit_within: non-positive dimensions");
  if (w <= max_w && h <= max_h) return {w, h};
  const double scale = std::min(static_cast<double>(max_w) / w, static_cast<double>(max_h) / h);
  const int nw = std::max(1, static_cast<int>(std::lround(w * scale)));
  const int nh = std::max(1, static_cast<int>(std::lround(h * scale)));
  return {std::min(nw, max_w), std::min(nh, max_h)};
}

}  // namespace docnav
