#ifndef WSMA_EVAL_HPP
#define WSMA_EVAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wsma/error.hpp"
#include "wsma/iou.hpp"

namespace wsma {

struct ScoredBox {
  RealBox box;
  double score = 0.0;
};

struct Matching {
  std::vector<int> det_to_gt;  // -1 when unmatched
  std::vector<int> gt_to_det;  // -1 when unmatched
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

inline void require_sorted_by_score(std::span<const ScoredBox> dets) {
  for (std::size_t i = 1; i < dets.size(); ++i) {
    if (dets[i].score > dets[i - 1].score) {
      throw Error(ErrorCode::UnsortedInput, "detection " + std::to_string(i) + " scores higher than its predecessor");
    }
  }
}

/// Greedy one-to-one matching in score order: each detection takes the
/// unmatched ground truth with the highest IoU >= iou_thresh (first one on
/// ties).
inline Matching match_greedy(std::span<const ScoredBox> dets, std::span<const RealBox> gts, double iou_thresh) {
  require_sorted_by_score(dets);
  Matching m{std::vector<int>(dets.size(), -1), std::vector<int>(gts.size(), -1), 0, 0, 0};
  for (std::size_t d = 0; d < dets.size(); ++d) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (m.gt_to_det[g] >= 0) continue;
      const double v = iou(dets[d].box, gts[g]);
      if (v >= iou_thresh && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      m.det_to_gt[d] = best;
      m.gt_to_det[best] = static_cast<int>(d);
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = static_cast<int>(gts.size()) - m.tp;
  return m;
}

/// Harmonic mean of precision and recall from match counts; 0 without true
/// positives.
inline double f1_score(int tp, int fp, int fn) {
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / (tp + fp);
  const double recall = static_cast<double>(tp) / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

struct ImageEval {
  std::vector<ScoredBox> dets;
  std::vector<RealBox> gts;
};

inline constexpr double kNoGroundTruth = -1.0;

struct MetricReport {
  double ap = kNoGroundTruth;
  double ap50 = kNoGroundTruth;
  double ap75 = kNoGroundTruth;
  double ap_s = kNoGroundTruth;
  double ap_m = kNoGroundTruth;
  double ap_l = kNoGroundTruth;
  double ar1 = kNoGroundTruth;
  double ar10 = kNoGroundTruth;
  double ar100 = kNoGroundTruth;
  double ar_s = kNoGroundTruth;
  double ar_m = kNoGroundTruth;
  double ar_l = kNoGroundTruth;
  double f1_at_50 = kNoGroundTruth;
};

/// Object scale buckets by box area: small < 32^2 <= medium <= 96^2 < large.
enum class AreaRange { All, Small, Medium, Large };

inline bool in_range(double area, AreaRange r) {
  constexpr double kSmall = 32.0 * 32.0;
  constexpr double kLarge = 96.0 * 96.0;
  switch (r) {
    case AreaRange::All: return true;
    case AreaRange::Small: return area < kSmall;
    case AreaRange::Medium: return area >= kSmall && area <= kLarge;
    case AreaRange::Large: return area > kLarge;
  }
  return false;
}

/// IoU thresholds .50:.05:.95.
inline std::array<double, 10> iou_thresholds() {
  std::array<double, 10> t{};
  for (int i = 0; i < 10; ++i) t[i] = 0.5 + 0.05 * i;
  return t;
}

/// 101 recall sample points 0, .01, ..., 1.
inline std::array<double, 101> recall_points() {
  std::array<double, 101> r{};
  for (int i = 0; i < 100; ++i) r[i] = 0.01 * i;
  r[100] = 1.0;
  return r;
}

namespace detail {

struct EvaluatedDet {
  double score;
  bool tp;
  bool ignored;
};

struct RangeResult {
  std::vector<EvaluatedDet> dets;  // global order: image, then score within image
  int num_gt = 0;                  // non-ignored ground truths
};

// Per-image matching restricted to a scale bucket. Ground truths outside the
// bucket are ignored: detections matched to them and unmatched detections
// whose own area falls outside the bucket do not count either way.
inline void evaluate_image(const ImageEval& img, double thresh, AreaRange range, std::size_t max_dets,
                           RangeResult& out) {
  std::vector<std::size_t> det_order(img.dets.size());
  std::iota(det_order.begin(), det_order.end(), 0);
  std::stable_sort(det_order.begin(), det_order.end(),
                   [&](std::size_t a, std::size_t b) { return img.dets[a].score > img.dets[b].score; });
  if (det_order.size() > max_dets) det_order.resize(max_dets);

  std::vector<std::size_t> gt_order(img.gts.size());
  std::iota(gt_order.begin(), gt_order.end(), 0);
  std::vector<char> gt_ignored(img.gts.size());
  for (std::size_t g = 0; g < img.gts.size(); ++g) gt_ignored[g] = !in_range(img.gts[g].area(), range);
  std::stable_sort(gt_order.begin(), gt_order.end(),
                   [&](std::size_t a, std::size_t b) { return gt_ignored[a] < gt_ignored[b]; });
  for (char ig : gt_ignored) out.num_gt += ig ? 0 : 1;

  std::vector<char> gt_taken(img.gts.size(), 0);
  for (std::size_t d : det_order) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g : gt_order) {
      if (gt_taken[g]) continue;
      // Once a real match exists, ignored candidates (sorted last) cannot replace it.
      if (best >= 0 && !gt_ignored[best] && gt_ignored[g]) break;
      const double v = iou(img.dets[d].box, img.gts[g]);
      if (v >= thresh && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    EvaluatedDet e{img.dets[d].score, false, false};
    if (best >= 0) {
      gt_taken[best] = 1;
      e.tp = true;
      e.ignored = gt_ignored[best] != 0;
    } else {
      e.ignored = !in_range(img.dets[d].box.area(), range);
    }
    out.dets.push_back(e);
  }
}

inline RangeResult evaluate(std::span<const ImageEval> images, double thresh, AreaRange range, std::size_t max_dets) {
  RangeResult r;
  for (const ImageEval& img : images) evaluate_image(img, thresh, range, max_dets, r);
  return r;
}

// 101-point interpolated average precision. -1 without ground truth.
inline double average_precision(const RangeResult& r) {
  if (r.num_gt == 0) return kNoGroundTruth;
  std::vector<EvaluatedDet> dets;
  for (const auto& d : r.dets) {
    if (!d.ignored) dets.push_back(d);
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const EvaluatedDet& a, const EvaluatedDet& b) { return a.score > b.score; });
  std::vector<double> recall(dets.size());
  std::vector<double> precision(dets.size());
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    (dets[i].tp ? tp : fp) += 1.0;
    recall[i] = tp / r.num_gt;
    precision[i] = tp / (tp + fp);
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (double point : recall_points()) {
    const auto it = std::lower_bound(recall.begin(), recall.end(), point);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

inline double recall_of(const RangeResult& r) {
  if (r.num_gt == 0) return kNoGroundTruth;
  int tp = 0;
  for (const auto& d : r.dets) tp += (d.tp && !d.ignored) ? 1 : 0;
  return static_cast<double>(tp) / r.num_gt;
}

inline double mean_defined(std::span<const double> values) {
  double sum = 0.0;
  int n = 0;
  for (double v : values) {
    if (v > kNoGroundTruth) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? kNoGroundTruth : sum / n;
}

}  // namespace detail

inline double average_precision_at(std::span<const ImageEval> images, double thresh,
                                   AreaRange range = AreaRange::All, std::size_t max_dets = 100) {
  return detail::average_precision(detail::evaluate(images, thresh, range, max_dets));
}

inline double average_recall(std::span<const ImageEval> images, AreaRange range, std::size_t max_dets) {
  std::vector<double> per_thresh;
  for (double t : iou_thresholds()) per_thresh.push_back(detail::recall_of(detail::evaluate(images, t, range, max_dets)));
  return detail::mean_defined(per_thresh);
}

inline double average_precision(std::span<const ImageEval> images, AreaRange range = AreaRange::All,
                                std::size_t max_dets = 100) {
  std::vector<double> per_thresh;
  for (double t : iou_thresholds()) per_thresh.push_back(average_precision_at(images, t, range, max_dets));
  return detail::mean_defined(per_thresh);
}

/// F1 over all detections with greedy matching at the given IoU.
inline double f1_over(std::span<const ImageEval> images, double iou_thresh) {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int num_gt = 0;
  for (const ImageEval& img : images) {
    std::vector<ScoredBox> dets = img.dets;
    std::stable_sort(dets.begin(), dets.end(), [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
    const Matching m = match_greedy(dets, img.gts, iou_thresh);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    num_gt += static_cast<int>(img.gts.size());
  }
  return num_gt == 0 ? kNoGroundTruth : f1_score(tp, fp, fn);
}

inline MetricReport compute_metrics(std::span<const ImageEval> images, double f1_iou = 0.5) {
  MetricReport r;
  r.ap = average_precision(images);
  r.ap50 = average_precision_at(images, 0.5);
  r.ap75 = average_precision_at(images, 0.75);
  r.ap_s = average_precision(images, AreaRange::Small);
  r.ap_m = average_precision(images, AreaRange::Medium);
  r.ap_l = average_precision(images, AreaRange::Large);
  r.ar1 = average_recall(images, AreaRange::All, 1);
  r.ar10 = average_recall(images, AreaRange::All, 10);
  r.ar100 = average_recall(images, AreaRange::All, 100);
  r.ar_s = average_recall(images, AreaRange::Small, 100);
  r.ar_m = average_recall(images, AreaRange::Medium, 100);
  r.ar_l = average_recall(images, AreaRange::Large, 100);
  r.f1_at_50 = f1_over(images, f1_iou);
  return r;
}

/// Fixed-width text rendering, one metric per line.
inline std::string format_report(const MetricReport& r) {
  const std::pair<const char*, double> rows[] = {
      {"AP @[.50:.95]", r.ap}, {"AP @.50", r.ap50},  {"AP @.75", r.ap75},   {"AP small", r.ap_s},
      {"AP medium", r.ap_m},   {"AP large", r.ap_l}, {"AR @1", r.ar1},      {"AR @10", r.ar10},
      {"AR @100", r.ar100},    {"AR small", r.ar_s}, {"AR medium", r.ar_m}, {"AR large", r.ar_l},
      {"F1 @.50", r.f1_at_50},
  };
  std::string out;
  char line[64];
  for (const auto& [name, value] : rows) {
    std::snprintf(line, sizeof line, "%-16s %8.4f\n", name, value);
    out += line;
  }
  return out;
}

}  // namespace wsma

#endif  // WSMA_EVAL_HPP
