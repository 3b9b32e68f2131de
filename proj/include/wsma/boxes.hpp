#ifndef WSMA_BOXES_HPP
#define WSMA_BOXES_HPP

#include <algorithm>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wsma/contour.hpp"
#include "wsma/error.hpp"
#include "wsma/grid.hpp"
#include "wsma/raster.hpp"

namespace wsma {

inline constexpr int kDefaultMinPixels = 4;

struct Detection {
  BBox box;
  double score = 0.0;
  int class_id = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Circumscribed axis-aligned box of a set's pixels.
inline BBox bounding_box(const ContourSet& set) {
  int x0 = std::numeric_limits<int>::max();
  int y0 = std::numeric_limits<int>::max();
  int x1 = std::numeric_limits<int>::min();
  int y1 = std::numeric_limits<int>::min();
  for (const Run& r : set.runs) {
    x0 = std::min(x0, r.x_left);
    x1 = std::max(x1, r.x_right);
    y0 = std::min(y0, r.row);
    y1 = std::max(y1, r.row);
  }
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

/// One detection per contour set with at least min_pixels pixels. The score
/// is the mean interior heatmap value over the set's pixels. Output is
/// sorted by descending score; ties keep contour order.
inline std::vector<Detection> boxes_from_contours(std::span<const ContourSet> sets, const ScalarGrid& interior,
                                                  int min_pixels = kDefaultMinPixels) {
  std::vector<Detection> out;
  out.reserve(sets.size());
  for (const ContourSet& set : sets) {
    if (set.runs.empty()) continue;
    const std::size_t n = set.pixel_count();
    if (n < static_cast<std::size_t>(std::max(min_pixels, 0))) continue;
    double sum = 0.0;
    for (const Run& r : set.runs) {
      if (r.row < 0 || r.row >= interior.height() || r.x_left < 0 || r.x_right >= interior.width()) {
        throw Error(ErrorCode::DimensionMismatch, "run at row " + std::to_string(r.row) +
                                                      " falls outside the interior heatmap");
      }
      const auto row = interior.row(r.row);
      for (int x = r.x_left; x <= r.x_right; ++x) sum += row[x];
    }
    const double score = std::clamp(sum / static_cast<double>(n), 0.0, 1.0);
    out.push_back({bounding_box(set), score, 0});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

}  // namespace wsma

#endif  // WSMA_BOXES_HPP
