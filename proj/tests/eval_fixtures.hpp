#ifndef WSMA_TESTS_EVAL_FIXTURES_HPP
#define WSMA_TESTS_EVAL_FIXTURES_HPP

#include <algorithm>
#include <vector>

#include "wsma/eval.hpp"

namespace fixtures {

using wsma::ImageEval;
using wsma::RealBox;

inline RealBox box_at(double x, double y, double side = 40.0) { return {x, y, side, side}; }

// Three images, six ground truths, eight detections. Every detection either
// coincides with a ground truth or overlaps nothing, so the result does not
// depend on the IoU threshold. Score order and outcome:
//   .90 TP  .85 TP  .80 FP  .75 TP  .70 FP (duplicate)  .60 TP  .50 TP  .40 FP
inline std::vector<ImageEval> toy_set() {
  std::vector<ImageEval> images(3);
  images[0].gts = {box_at(0, 0), box_at(100, 0)};
  images[0].dets = {{box_at(0, 0), 0.9}, {box_at(300, 300), 0.8}, {box_at(100, 0), 0.6}};
  images[1].gts = {box_at(50, 50)};
  images[1].dets = {{box_at(50, 50), 0.85}, {box_at(50, 50), 0.7}};
  images[2].gts = {box_at(0, 0), box_at(100, 100), box_at(200, 200)};
  images[2].dets = {{box_at(0, 0), 0.75}, {box_at(100, 100), 0.5}, {box_at(400, 0), 0.4}};
  return images;
}

// Precision-recall oracle: walk detections in score order, then for each
// recall level take the best precision reached at that recall or beyond.
inline double pr_oracle(const std::vector<bool>& tp_in_score_order, int num_gt) {
  std::vector<double> recall, precision;
  int tp = 0;
  for (std::size_t k = 0; k < tp_in_score_order.size(); ++k) {
    tp += tp_in_score_order[k];
    recall.push_back(static_cast<double>(tp) / num_gt);
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  double sum = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    double best = 0.0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
      if (recall[k] >= r - 1e-12) best = std::max(best, precision[k]);
    }
    sum += best;
  }
  return sum / 101.0;
}

// Exact value of the toy set, worked out by hand with fractions.
inline constexpr double kToyAp = 1969.0 / 2828.0;

}  // namespace fixtures

#endif  // WSMA_TESTS_EVAL_FIXTURES_HPP
