#ifndef WSMA_PIPELINE_HPP
#define WSMA_PIPELINE_HPP

#include <vector>

#include "wsma/boxes.hpp"
#include "wsma/contour.hpp"
#include "wsma/heatmap.hpp"
#include "wsma/merge.hpp"

namespace wsma {

struct DetectParams {
  double threshold = kDefaultThreshold;
  MergeMode merge_mode = MergeMode::Literal;
  ContourMode contour_mode = ContourMode::Robust;
  int min_pixels = kDefaultMinPixels;
};

/// Testing phase: binarize, merge into an instance map, trace contours and
/// box them.
inline std::vector<Detection> detect(const MultimodalHeatmap& hm, const DetectParams& p = {}) {
  const BinaryMask instances = merge_instance_map(hm, p.threshold, p.merge_mode);
  const std::vector<ContourSet> sets = rdb_follow(instances, p.contour_mode);
  return boxes_from_contours(sets, hm.interior, p.min_pixels);
}

}  // namespace wsma

#endif  // WSMA_PIPELINE_HPP
