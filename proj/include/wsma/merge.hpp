#ifndef WSMA_MERGE_HPP
#define WSMA_MERGE_HPP

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "wsma/error.hpp"
#include "wsma/grid.hpp"
#include "wsma/heatmap.hpp"

namespace wsma {

inline constexpr double kDefaultThreshold = 0.5;

/// literal: I xor (B and O). robust: I and not (B and O). They agree
/// wherever (B and O) lies inside I.
enum class MergeMode { Literal, Robust };

constexpr std::string_view to_string(MergeMode m) {
  return m == MergeMode::Literal ? "literal" : "robust";
}

inline std::optional<MergeMode> parse_merge_mode(std::string_view s) {
  if (s == "literal") return MergeMode::Literal;
  if (s == "robust") return MergeMode::Robust;
  return std::nullopt;
}

inline void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::BadThreshold, "threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
}

/// pixel = 1 iff value >= threshold.
inline BinaryMask binarize(const ScalarGrid& grid, double threshold) {
  check_threshold(threshold);
  BinaryMask out(grid.width(), grid.height());
  for (std::size_t i = 0; i < grid.size(); ++i) out.data()[i] = static_cast<std::uint8_t>(grid.data()[i] >= threshold);
  return out;
}

struct BinarizedHeatmap {
  BinaryMask interior;
  BinaryMask boundary;
  BinaryMask boundary_on_interior;
};

inline BinarizedHeatmap binarize(const MultimodalHeatmap& hm, double threshold) {
  hm.validate();
  return {binarize(hm.interior, threshold), binarize(hm.boundary, threshold),
          binarize(hm.boundary_on_interior, threshold)};
}

inline BinaryMask merge_binary(const BinarizedHeatmap& b, MergeMode mode) {
  require_same_shape(b.interior, b.boundary, "merge boundary channel");
  require_same_shape(b.interior, b.boundary_on_interior, "merge boundary-on-interior channel");
  BinaryMask out(b.interior.width(), b.interior.height());
  const auto& in = b.interior.data();
  const auto& bd = b.boundary.data();
  const auto& oi = b.boundary_on_interior.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool cut = bd[i] && oi[i];
    const bool keep = mode == MergeMode::Literal ? (static_cast<bool>(in[i]) != cut) : (in[i] && !cut);
    out.data()[i] = static_cast<std::uint8_t>(keep);
  }
  return out;
}

/// Instance-aware segmentation map from the three heatmaps.
inline BinaryMask merge_instance_map(const MultimodalHeatmap& hm, double threshold = kDefaultThreshold,
                                     MergeMode mode = MergeMode::Literal) {
  return merge_binary(binarize(hm, threshold), mode);
}

/// Pixels where literal and robust merging disagree: (B and O) outside I.
inline BinaryMask merge_discrepancy(const MultimodalHeatmap& hm, double threshold = kDefaultThreshold) {
  const BinarizedHeatmap b = binarize(hm, threshold);
  BinaryMask out(b.interior.width(), b.interior.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = static_cast<std::uint8_t>(!b.interior.data()[i] && b.boundary.data()[i] &&
                                              b.boundary_on_interior.data()[i]);
  }
  return out;
}

}  // namespace wsma

#endif  // WSMA_MERGE_HPP
