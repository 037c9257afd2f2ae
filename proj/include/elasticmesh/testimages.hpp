#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "elasticmesh/field.hpp"

namespace elasticmesh {

namespace detail {

inline void require_level(double g, const char* what) {
  if (!(g >= 0.0 && g <= 255.0)) {
    throw std::invalid_argument(std::string(what) + ": greyscale level must be in [0, 255]");
  }
}

}  // namespace detail

// Left half g_left, right half g_right.
inline Grid gen_halves(int w, int h, double g_left = 180.0, double g_right = 60.0) {
  detail::require_level(g_left, "gen_halves");
  detail::require_level(g_right, "gen_halves");
  if (w < 2 || w % 2 != 0) {
    throw std::invalid_argument("gen_halves: width must be even and at least 2, got " +
                                std::to_string(w));
  }
  Grid grid(w, h, g_right);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w / 2; ++x) grid(x, y) = g_left;
  }
  return grid;
}

// Half-open pixel bounds [x0, x1) x [y0, y1).
struct RectBounds {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

inline RectBounds centered_rect(int w, int h) {
  return {w / 4, h / 4, 3 * w / 4, 3 * h / 4};
}

// Rectangle of level g_rect on a g_bg background; the rectangle must leave a
// background ring on every side.
inline Grid gen_rect(int w, int h, RectBounds rect, double g_rect = 60.0,
                     double g_bg = 180.0) {
  detail::require_level(g_rect, "gen_rect");
  detail::require_level(g_bg, "gen_rect");
  if (rect.x0 < 1 || rect.y0 < 1 || rect.x1 > w - 1 || rect.y1 > h - 1 ||
      rect.x0 >= rect.x1 || rect.y0 >= rect.y1) {
    throw std::invalid_argument(
        "gen_rect: rectangle must be non-empty and strictly inside the image");
  }
  Grid grid(w, h, g_bg);
  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) grid(x, y) = g_rect;
  }
  return grid;
}

// Circle upper-left, triangle upper-right, rectangle lower-center, each
// darker than the background and separated from the others by background.
// Layout is fixed as fractions of the image size; shapes each cover roughly
// 5-15% of a square image.
inline Grid gen_shapes(int w, int h, double g_bg = 200.0, double g_circle = 60.0,
                       double g_triangle = 100.0, double g_rect = 140.0) {
  detail::require_level(g_bg, "gen_shapes");
  detail::require_level(g_circle, "gen_shapes");
  detail::require_level(g_triangle, "gen_shapes");
  detail::require_level(g_rect, "gen_shapes");
  if (w < 32 || h < 32) {
    throw std::invalid_argument("gen_shapes: image must be at least 32x32, got " +
                                std::to_string(w) + "x" + std::to_string(h));
  }
  if (!(g_circle < g_bg) || !(g_triangle < g_bg) || !(g_rect < g_bg)) {
    throw std::invalid_argument("gen_shapes: every shape must be darker than the background");
  }

  Grid grid(w, h, g_bg);

  const double cx = 0.27 * w;
  const double cy = 0.28 * h;
  const double radius = 0.15 * std::min(w, h);
  const int x_lo = std::max(0, static_cast<int>(std::floor(cx - radius)) - 1);
  const int x_hi = std::min(w - 1, static_cast<int>(std::ceil(cx + radius)) + 1);
  const int y_lo = std::max(0, static_cast<int>(std::floor(cy - radius)) - 1);
  const int y_hi = std::min(h - 1, static_cast<int>(std::ceil(cy + radius)) + 1);
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= radius * radius) grid(x, y) = g_circle;
    }
  }

  const double ax = 0.74 * w, ay = 0.10 * h;
  const double bx = 0.58 * w, by = 0.42 * h;
  const double tcx = 0.92 * w, tcy = 0.42 * h;
  const auto side = [](double px, double py, double qx, double qy, double rx, double ry) {
    return (qx - px) * (ry - py) - (qy - py) * (rx - px);
  };
  const int ty_lo = static_cast<int>(std::floor(std::min({ay, by, tcy})));
  const int ty_hi = static_cast<int>(std::ceil(std::max({ay, by, tcy})));
  const int tx_lo = static_cast<int>(std::floor(std::min({ax, bx, tcx})));
  const int tx_hi = static_cast<int>(std::ceil(std::max({ax, bx, tcx})));
  for (int y = std::max(0, ty_lo); y <= std::min(h - 1, ty_hi); ++y) {
    for (int x = std::max(0, tx_lo); x <= std::min(w - 1, tx_hi); ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double s1 = side(ax, ay, bx, by, px, py);
      const double s2 = side(bx, by, tcx, tcy, px, py);
      const double s3 = side(tcx, tcy, ax, ay, px, py);
      const bool all_nonneg = s1 >= 0 && s2 >= 0 && s3 >= 0;
      const bool all_nonpos = s1 <= 0 && s2 <= 0 && s3 <= 0;
      if (all_nonneg || all_nonpos) grid(x, y) = g_triangle;
    }
  }

  const int rx0 = static_cast<int>(std::llround(0.30 * w));
  const int rx1 = static_cast<int>(std::llround(0.72 * w));
  const int ry0 = static_cast<int>(std::llround(0.58 * h));
  const int ry1 = static_cast<int>(std::llround(0.88 * h));
  for (int y = ry0; y < ry1; ++y) {
    for (int x = rx0; x < rx1; ++x) grid(x, y) = g_rect;
  }

  return grid;
}

}  // namespace elasticmesh
