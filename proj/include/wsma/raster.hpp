#ifndef WSMA_RASTER_HPP
#define WSMA_RASTER_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "wsma/error.hpp"
#include "wsma/grid.hpp"

namespace wsma {

/// Axis-aligned integer box, (x, y) is the top-left pixel.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  int right() const noexcept { return x + w; }   // exclusive
  int bottom() const noexcept { return y + h; }  // exclusive
  long long area() const noexcept { return static_cast<long long>(w) * h; }
  bool valid() const noexcept { return w >= 1 && h >= 1; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline std::string to_string(const BBox& b) {
  return "(" + std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) + "," +
         std::to_string(b.h) + ")";
}

/// Intersects the box with [0, width) x [0, height). Throws EmptyAfterClamp
/// when nothing is left.
inline BBox clamp_box(const BBox& b, int width, int height) {
  const int x0 = std::max(b.x, 0);
  const int y0 = std::max(b.y, 0);
  const int x1 = std::min(b.right(), width);
  const int y1 = std::min(b.bottom(), height);
  if (x1 <= x0 || y1 <= y0) {
    throw Error(ErrorCode::EmptyAfterClamp,
                "box " + to_string(b) + " has no area inside " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double a = 0.0;  // semi-axis along x
  double b = 0.0;  // semi-axis along y

  friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

inline Ellipse inscribed_ellipse(const BBox& box) {
  return {box.x + box.w / 2.0, box.y + box.h / 2.0, box.w / 2.0, box.h / 2.0};
}

/// Pixel-center membership: pixel (x, y) belongs to the ellipse iff its
/// center (x + 0.5, y + 0.5) lies on or inside the boundary.
inline bool ellipse_contains(const Ellipse& e, int x, int y) noexcept {
  const double u = (x + 0.5 - e.cx) / e.a;
  const double v = (y + 0.5 - e.cy) / e.b;
  return u * u + v * v <= 1.0;
}

/// Calls fn(y, x_first, x_last) for every row of the canvas that the ellipse
/// covers, with an inclusive column interval already clipped to the canvas.
/// The interval is exactly the set of columns for which ellipse_contains()
/// holds: sqrt only seeds the search and the endpoints are settled with the
/// membership predicate itself, which is monotone in |x - cx| per row.
template <typename Fn>
void for_each_ellipse_span(const Ellipse& e, int width, int height, Fn&& fn) {
  if (!(e.a > 0.0) || !(e.b > 0.0) || width <= 0 || height <= 0) return;
  const int y_lo = std::max(0, static_cast<int>(std::floor(e.cy - e.b)) - 1);
  const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(e.cy + e.b)) + 1);
  for (int y = y_lo; y <= y_hi; ++y) {
    const double v = (y + 0.5 - e.cy) / e.b;
    const double rest = 1.0 - v * v;
    if (rest < 0.0) continue;
    const double half = e.a * std::sqrt(rest);
    int lo = static_cast<int>(std::floor(e.cx - half - 0.5)) - 1;
    int hi = static_cast<int>(std::ceil(e.cx + half - 0.5)) + 1;
    lo = std::max(lo, 0);
    hi = std::min(hi, width - 1);
    while (lo <= hi && !ellipse_contains(e, lo, y)) ++lo;
    while (hi >= lo && !ellipse_contains(e, hi, y)) --hi;
    if (lo <= hi) fn(y, lo, hi);
  }
}

/// Sets every pixel of the ellipse in place; pixels already set stay set.
inline void paint_ellipse(const Ellipse& e, BinaryMask& canvas) {
  for_each_ellipse_span(e, canvas.width(), canvas.height(), [&](int y, int x0, int x1) {
    auto row = canvas.row(y);
    std::fill(row.begin() + x0, row.begin() + x1 + 1, std::uint8_t{1});
  });
}

inline BinaryMask fill_ellipse(const Ellipse& e, BinaryMask canvas) {
  paint_ellipse(e, canvas);
  return canvas;
}

/// The ellipse with both semi-axes reduced by ring_width. Returns an ellipse
/// with a zero axis when the shrink consumes it (which rasterizes to nothing).
inline Ellipse shrink_ellipse(const Ellipse& e, int ring_width) {
  return {e.cx, e.cy, std::max(e.a - ring_width, 0.0), std::max(e.b - ring_width, 0.0)};
}

/// Pixels of e that are not in e shrunk by ring_width, painted in place.
inline void paint_ellipse_ring(const Ellipse& e, int ring_width, BinaryMask& canvas) {
  if (ring_width < 1) {
    throw Error(ErrorCode::BadArgument, "ring_width must be >= 1, got " + std::to_string(ring_width));
  }
  const Ellipse inner = shrink_ellipse(e, ring_width);
  const bool inner_empty = inner.a <= 0.0 || inner.b <= 0.0;
  for_each_ellipse_span(e, canvas.width(), canvas.height(), [&](int y, int x0, int x1) {
    auto row = canvas.row(y);
    for (int x = x0; x <= x1; ++x) {
      if (inner_empty || !ellipse_contains(inner, x, y)) row[x] = 1;
    }
  });
}

inline BinaryMask ellipse_ring(const Ellipse& e, int ring_width, BinaryMask canvas) {
  paint_ellipse_ring(e, ring_width, canvas);
  return canvas;
}

/// One erosion with the 3x3 square structuring element. Pixels outside the
/// image count as background, so border pixels always erode away.
inline BinaryMask erode3x3(const BinaryMask& in) {
  const int w = in.width();
  const int h = in.height();
  BinaryMask horiz(w, h);
  for (int y = 0; y < h; ++y) {
    const auto src = in.row(y);
    auto dst = horiz.row(y);
    for (int x = 0; x < w; ++x) {
      const bool left = x > 0 && src[x - 1];
      const bool right = x + 1 < w && src[x + 1];
      dst[x] = static_cast<std::uint8_t>(src[x] && left && right);
    }
  }
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    if (y == 0 || y + 1 == h) continue;
    const auto up = horiz.row(y - 1);
    const auto mid = horiz.row(y);
    const auto down = horiz.row(y + 1);
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = static_cast<std::uint8_t>(up[x] && mid[x] && down[x]);
  }
  return out;
}

/// Pixels of region within chessboard distance ring_width of the region's
/// complement (out-of-image counts as complement): region minus its
/// ring_width-fold 3x3 erosion.
inline BinaryMask inner_boundary(const BinaryMask& region, int ring_width) {
  if (ring_width < 1) {
    throw Error(ErrorCode::BadArgument, "ring_width must be >= 1, got " + std::to_string(ring_width));
  }
  BinaryMask eroded = region;
  for (int i = 0; i < ring_width; ++i) {
    eroded = erode3x3(eroded);
    if (count_set(eroded) == 0) break;
  }
  BinaryMask out(region.width(), region.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = static_cast<std::uint8_t>(region.data()[i] && !eroded.data()[i]);
  }
  return out;
}

}  // namespace wsma

#endif  // WSMA_RASTER_HPP
