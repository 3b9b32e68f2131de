#ifndef WSMA_IOU_HPP
#define WSMA_IOU_HPP

#include <algorithm>

namespace wsma {

/// Box with real-valued extents, as found in COCO-style files.
struct RealBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const noexcept { return w * h; }

  friend bool operator==(const RealBox&, const RealBox&) = default;
};

template <typename Box>
concept BoxLike = requires(const Box& b) {
  b.x;
  b.y;
  b.w;
  b.h;
};

template <BoxLike Box>
RealBox to_real(const Box& b) {
  return {static_cast<double>(b.x), static_cast<double>(b.y), static_cast<double>(b.w), static_cast<double>(b.h)};
}

/// Intersection over union with real-valued extents; 0 for disjoint or
/// degenerate pairs.
template <BoxLike A, BoxLike B>
double iou(const A& a, const B& b) {
  const RealBox p = to_real(a);
  const RealBox q = to_real(b);
  const double iw = std::min(p.x + p.w, q.x + q.w) - std::max(p.x, q.x);
  const double ih = std::min(p.y + p.h, q.y + q.h) - std::max(p.y, q.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = p.area() + q.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace wsma

#endif  // WSMA_IOU_HPP
