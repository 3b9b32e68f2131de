#ifndef WSMA_ANNOTATE_HPP
#define WSMA_ANNOTATE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsma/error.hpp"
#include "wsma/grid.hpp"
#include "wsma/heatmap.hpp"
#include "wsma/raster.hpp"

namespace wsma {

inline constexpr int kDefaultRingWidth = 2;

/// Training label derived from box annotations.
///   channel 0 (interior): union of inscribed ellipses
///   channel 1 (boundary): union of ellipse rings of width ring_width
///   channel 2 (boundary_on_interior): inner boundary, same width, of the
///     region covered by two or more ellipses
struct MultimodalMask {
  BinaryMask interior;
  BinaryMask boundary;
  BinaryMask boundary_on_interior;
  int ring_width = kDefaultRingWidth;

  int width() const noexcept { return interior.width(); }
  int height() const noexcept { return interior.height(); }

  friend bool operator==(const MultimodalMask&, const MultimodalMask&) = default;
};

inline MultimodalMask make_multimodal(std::span<const BBox> boxes, int image_w, int image_h,
                                      int ring_width = kDefaultRingWidth) {
  if (image_w <= 0 || image_h <= 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "image size must be positive, got " + std::to_string(image_w) + "x" + std::to_string(image_h));
  }
  if (ring_width < 1) {
    throw Error(ErrorCode::BadArgument, "ring_width must be >= 1, got " + std::to_string(ring_width));
  }

  MultimodalMask out{BinaryMask(image_w, image_h), BinaryMask(image_w, image_h),
                     BinaryMask(image_w, image_h), ring_width};
  // Coverage saturates at 2; only "two or more" matters.
  BinaryMask coverage(image_w, image_h);

  for (const BBox& raw : boxes) {
    const Ellipse e = inscribed_ellipse(clamp_box(raw, image_w, image_h));
    for_each_ellipse_span(e, image_w, image_h, [&](int y, int x0, int x1) {
      auto interior = out.interior.row(y);
      auto cover = coverage.row(y);
      for (int x = x0; x <= x1; ++x) {
        interior[x] = 1;
        if (cover[x] < 2) ++cover[x];
      }
    });
    paint_ellipse_ring(e, ring_width, out.boundary);
  }

  for (auto& v : coverage.data()) v = static_cast<std::uint8_t>(v >= 2);
  out.boundary_on_interior = inner_boundary(coverage, ring_width);
  return out;
}

inline ScalarGrid to_scalar(const BinaryMask& m) {
  ScalarGrid g(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) g.data()[i] = m.data()[i] ? 1.0 : 0.0;
  return g;
}

/// Heatmaps a perfect segmentation model would emit for this label.
inline MultimodalHeatmap ideal_heatmaps(const MultimodalMask& mask) {
  return {to_scalar(mask.interior), to_scalar(mask.boundary), to_scalar(mask.boundary_on_interior)};
}

}  // namespace wsma

#endif  // WSMA_ANNOTATE_HPP
