#ifndef WSMA_SYNTH_HPP
#define WSMA_SYNTH_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wsma/annotate.hpp"
#include "wsma/error.hpp"
#include "wsma/heatmap.hpp"
#include "wsma/iou.hpp"
#include "wsma/raster.hpp"

namespace wsma {

inline constexpr int kPlacementAttempts = 1000;

struct SceneSpec {
  int image_w = 512;
  int image_h = 512;
  int n_objects = 10;
  int size_min = 16;
  int size_max = 64;
  double max_pair_iou = 0.0;
  double noise_sigma = 0.0;
  double flip_prob = 0.0;
  std::uint64_t seed = 0;
  int ring_width = kDefaultRingWidth;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::BadArgument, "scene spec: " + what); };
    if (image_w <= 0 || image_h <= 0) fail("image size must be positive");
    if (n_objects < 0) fail("n_objects must be >= 0");
    if (size_min < 1 || size_min > size_max || size_max > std::min(image_w, image_h)) {
      fail("need 1 <= size_min <= size_max <= min(image_w, image_h)");
    }
    if (!(max_pair_iou >= 0.0 && max_pair_iou < 1.0)) fail("max_pair_iou must lie in [0, 1)");
    if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
    if (!(flip_prob >= 0.0 && flip_prob < 1.0)) fail("flip_prob must lie in [0, 1)");
    if (ring_width < 1) fail("ring_width must be >= 1");
  }
};

struct Scene {
  std::vector<BBox> boxes;
  MultimodalHeatmap heatmap;
};

/// Rejection-samples boxes so that every pair has IoU <= max_pair_iou.
inline std::vector<BBox> place_boxes(const SceneSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> side(spec.size_min, spec.size_max);
  std::vector<BBox> boxes;
  boxes.reserve(static_cast<std::size_t>(spec.n_objects));
  for (int n = 0; n < spec.n_objects; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const int w = side(rng);
      const int h = side(rng);
      const int x = std::uniform_int_distribution<int>(0, spec.image_w - w)(rng);
      const int y = std::uniform_int_distribution<int>(0, spec.image_h - h)(rng);
      const BBox cand{x, y, w, h};
      placed = std::all_of(boxes.begin(), boxes.end(),
                           [&](const BBox& b) { return iou(cand, b) <= spec.max_pair_iou; });
      if (placed) boxes.push_back(cand);
    }
    if (!placed) {
      throw Error(ErrorCode::PlacementFailure, "could not place object " + std::to_string(n) + " after " +
                                                   std::to_string(kPlacementAttempts) + " attempts");
    }
  }
  return boxes;
}

/// Additive Gaussian noise clamped to [0, 1], then independent flips
/// v -> 1 - v, channel by channel in I, B, O order.
inline void corrupt_heatmap(MultimodalHeatmap& hm, double noise_sigma, double flip_prob, std::mt19937_64& rng) {
  ScalarGrid* channels[] = {&hm.interior, &hm.boundary, &hm.boundary_on_interior};
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (ScalarGrid* g : channels) {
      for (double& v : g->data()) v = std::clamp(v + noise(rng), 0.0, 1.0);
    }
  }
  if (flip_prob > 0.0) {
    std::bernoulli_distribution flip(flip_prob);
    for (ScalarGrid* g : channels) {
      for (double& v : g->data()) {
        if (flip(rng)) v = 1.0 - v;
      }
    }
  }
}

/// Ground-truth boxes plus the heatmaps a segmentation model would produce,
/// optionally corrupted. Deterministic for a fixed spec (seed included).
inline Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Scene scene;
  scene.boxes = place_boxes(spec, rng);
  scene.heatmap = ideal_heatmaps(make_multimodal(scene.boxes, spec.image_w, spec.image_h, spec.ring_width));
  corrupt_heatmap(scene.heatmap, spec.noise_sigma, spec.flip_prob, rng);
  return scene;
}

}  // namespace wsma

#endif  // WSMA_SYNTH_HPP
