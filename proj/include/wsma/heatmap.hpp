#ifndef WSMA_HEATMAP_HPP
#define WSMA_HEATMAP_HPP

#include "wsma/grid.hpp"

namespace wsma {

/// The three segmentation heatmaps: interior (I), boundary (B) and
/// boundary-on-interior (O). Values in [0, 1], equal dimensions.
struct MultimodalHeatmap {
  ScalarGrid interior;
  ScalarGrid boundary;
  ScalarGrid boundary_on_interior;

  int width() const noexcept { return interior.width(); }
  int height() const noexcept { return interior.height(); }

  void validate() const {
    require_same_shape(interior, boundary, "heatmap boundary channel");
    require_same_shape(interior, boundary_on_interior, "heatmap boundary-on-interior channel");
  }

  friend bool operator==(const MultimodalHeatmap&, const MultimodalHeatmap&) = default;
};

}  // namespace wsma

#endif  // WSMA_HEATMAP_HPP
