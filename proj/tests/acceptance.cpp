// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "eval_fixtures.hpp"
#include "oracles.hpp"
#include "wsma/io/coco.hpp"
#include "wsma/wsma.hpp"

using namespace wsma;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& measured) {
  std::printf("%s criterion %d: %s [%s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), measured.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<ScoredBox> scored(const std::vector<Detection>& dets) {
  std::vector<ScoredBox> out;
  for (const auto& d : dets) out.push_back({to_real(d.box), d.score});
  return out;
}

std::vector<RealBox> real(const std::vector<BBox>& boxes) {
  std::vector<RealBox> out;
  for (const auto& b : boxes) out.push_back(to_real(b));
  return out;
}

int max_edge_error(const BBox& a, const BBox& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.right() - b.right()),
                   std::abs(a.bottom() - b.bottom())});
}

void criterion1() {
  constexpr int kScenes = 100;
  constexpr int kRing = kDefaultRingWidth;
  int tp = 0, fp = 0, fn = 0, worst_edge = 0;
  double worst_seconds = 0.0;
  for (int s = 0; s < kScenes; ++s) {
    SceneSpec spec;
    spec.seed = 1000 + s;
    spec.max_pair_iou = 0.0;
    std::mt19937_64 rng(spec.seed);
    const std::vector<BBox> boxes = place_boxes(spec, rng);
    const auto t0 = std::chrono::steady_clock::now();
    const MultimodalHeatmap hm = ideal_heatmaps(make_multimodal(boxes, spec.image_w, spec.image_h, kRing));
    const std::vector<Detection> dets = detect(hm);
    worst_seconds = std::max(worst_seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    const Matching m = match_greedy(scored(dets), real(boxes), 0.5);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    for (std::size_t g = 0; g < boxes.size(); ++g) {
      if (m.gt_to_det[g] >= 0) worst_edge = std::max(worst_edge, max_edge_error(boxes[g], dets[m.gt_to_det[g]].box));
    }
  }
  const double f1 = f1_score(tp, fp, fn);
  report(1, f1 >= 0.99 && worst_edge <= kRing + 1 && worst_seconds <= 1.0,
         "clean round trip: F1@0.5 >= 0.99, edge error <= ring_width+1, <= 1 s/scene",
         fmt("F1 %.4f, max edge error %.0f px, slowest scene %.3f s", f1, worst_edge, worst_seconds));
}

BBox random_box(std::mt19937_64& rng, int lo, int hi, int image) {
  std::uniform_int_distribution<int> side(lo, hi);
  const int w = side(rng);
  const int h = side(rng);
  return {std::uniform_int_distribution<int>(0, image - w)(rng), std::uniform_int_distribution<int>(0, image - h)(rng),
          w, h};
}

void criterion2() {
  constexpr int kScenes = 200;
  constexpr int kImage = 512;
  std::mt19937_64 rng(2002);
  int exactly_two = 0;
  int histogram[4] = {0, 0, 0, 0};
  for (int s = 0; s < kScenes; ++s) {
    BBox a, b;
    double v = 0.0;
    do {
      a = random_box(rng, 16, 64, kImage);
      // Second box near the first so the IoU band is hit quickly.
      std::uniform_int_distribution<int> off(-48, 48);
      const BBox c = random_box(rng, 16, 64, kImage);
      b = {std::clamp(a.x + off(rng), 0, kImage - c.w), std::clamp(a.y + off(rng), 0, kImage - c.h), c.w, c.h};
      v = iou(a, b);
    } while (v < 0.05 || v > 0.30);
    const std::vector<BBox> boxes{a, b};
    const MultimodalHeatmap hm = ideal_heatmaps(make_multimodal(boxes, kImage, kImage, kDefaultRingWidth));
    DetectParams params;
    params.merge_mode = MergeMode::Literal;
    const std::size_t n = detect(hm, params).size();
    exactly_two += n == 2;
    ++histogram[std::min<std::size_t>(n, 3)];
  }
  const double rate = static_cast<double>(exactly_two) / kScenes;
  report(2, rate >= 0.95, "occlusion separation: >= 95% of pair scenes give exactly 2 detections",
         fmt("%.1f%% exactly two; scenes with 0/1/3+ detections: %.0f/%.0f/", 100.0 * rate, histogram[0], histogram[1]) +
             std::to_string(histogram[3]));
}

std::vector<BinaryMask> ellipse_scenes(int count, std::uint64_t seed) {
  std::vector<BinaryMask> out;
  for (int s = 0; s < count; ++s) {
    SceneSpec spec;
    spec.seed = seed + s;
    spec.n_objects = 20;
    spec.size_max = 96;
    spec.max_pair_iou = 0.5;
    std::mt19937_64 rng(spec.seed);
    out.push_back(make_multimodal(place_boxes(spec, rng), 512, 512).interior);
  }
  return out;
}

void criterion3() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> density(0.05, 0.9);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const BinaryMask m = oracle::random_mask(rng, dim(rng), dim(rng), density(rng));
    mismatches += oracle::partition_of(rdb_follow(m, ContourMode::Robust), m.width()) != oracle::flood_fill(m);
  }
  for (const BinaryMask& m : ellipse_scenes(50, 3100)) {
    mismatches += oracle::partition_of(rdb_follow(m, ContourMode::Robust), m.width()) != oracle::flood_fill(m);
  }
  report(3, mismatches == 0, "robust following equals 8-connected flood fill on 1000 small masks and 50 ellipse scenes",
         std::to_string(mismatches) + " mismatches");
}

// Largest per-row movement of either run edge between consecutive rows of
// a single-run-per-row shape.
int edge_drift(const BinaryMask& m) {
  int worst = 0;
  std::vector<Run> prev;
  for (int y = 0; y < m.height(); ++y) {
    const std::vector<Run> cur = scan_runs(m, y);
    if (prev.size() == 1 && cur.size() == 1) {
      worst = std::max({worst, std::abs(cur[0].x_left - prev[0].x_left), std::abs(cur[0].x_right - prev[0].x_right)});
    }
    prev = cur;
  }
  return worst;
}

void criterion4() {
  std::mt19937_64 rng(4004);
  int masks = 0, mismatches = 0, bounded = 0, bounded_mismatches = 0;
  auto check = [&](const BinaryMask& m, bool single) {
    const bool same = rdb_follow(m, ContourMode::Literal) == rdb_follow(m, ContourMode::Robust);
    ++masks;
    mismatches += !same;
    if (single && edge_drift(m) <= 1) {
      ++bounded;
      bounded_mismatches += !same;
    }
  };
  for (int t = 0; t < 500; ++t) {
    const BBox box = random_box(rng, 1, 64, 64);
    check(fill_ellipse(inscribed_ellipse(box), BinaryMask(64, 64)), true);
  }
  for (const BinaryMask& m : ellipse_scenes(50, 3100)) check(m, false);
  report(4, mismatches == 0, "literal and robust following agree on rasterized ellipse masks",
         std::to_string(mismatches) + " of " + std::to_string(masks) + " masks differ; " +
             std::to_string(bounded_mismatches) + " of " + std::to_string(bounded) +
             " single ellipses with edge drift <= 1 differ");
}

void criterion5() {
  RunConfig cfg;
  cfg.seed = 5005;
  cli::BenchOptions opts;  // 2666 x 2000, 150 blobs
  const auto r = cli::cmd_bench(cfg, opts);
  const auto& rdb = r["rdb"];
  const bool ok = rdb["within_bound"].get<bool>() && r["width"] == 2666 && r["height"] == 2000;
  report(5, ok, "streaming bound: peak run records <= 2 x max runs per row on a 2000x2666 mask",
         "peak " + rdb["peak_run_records"].dump() + ", max runs/row " + rdb["max_runs_per_row"].dump() +
             ", components " + rdb["components"].dump() +
             fmt(", baseline/rdb time ratio %.2f", r["time_ratio_baseline_over_rdb"].get<double>()));
}

void criterion6() {
  std::mt19937_64 rng(6006);
  std::normal_distribution<double> n(0.0, 1.0);
  double forward = 0.0, grad = 0.0;
  bool identity_k1 = true, identity_zero = true;
  for (int t = 0; t < 10; ++t) {
    FeatureMap x(8, 8, 4);
    for (double& v : x.data()) v = n(rng);
    MspBlockParams p(4);
    for (double& v : p.weights) v = 0.3 * n(rng);
    for (double& v : p.bias) v = 0.3 * n(rng);
    const FeatureMap y = msp_block_forward(x, p);
    const FeatureMap ref = oracle::msp_forward(x, p);
    for (std::size_t i = 0; i < y.size(); ++i) {
      forward = std::max(forward, relative_error(y.data()[i], ref.data()[i]));
    }
    if (t < 3) grad = std::max(grad, msp_block_grad_check(x, p).max());
    identity_k1 = identity_k1 && avg_pool_same(x, 1) == x;
    identity_zero = identity_zero && msp_block_forward(x, MspBlockParams(4)) == x;
  }
  report(6, forward <= 1e-12 && grad <= 1e-5 && identity_k1 && identity_zero,
         "block forward vs direct sum <= 1e-12, gradient check <= 1e-5, exact identities",
         fmt("forward %.2e, gradient %.2e, k=1 identity ", forward, grad) + (identity_k1 ? "yes" : "no") +
             ", zero-block identity " + (identity_zero ? "yes" : "no"));
}

void criterion7() {
  const MetricReport toy = compute_metrics(fixtures::toy_set());
  const double toy_err = std::abs(toy.ap - fixtures::kToyAp);

  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> pos(0.0, 300.0), side(6.0, 140.0), jitter(-8.0, 8.0), unit(0.0, 1.0);
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<ImageEval> images(3);
    for (auto& img : images) {
      for (int i = 0; i < 6; ++i) {
        const RealBox g{pos(rng), pos(rng), side(rng), side(rng)};
        img.gts.push_back(g);
        if (unit(rng) < 0.8) img.dets.push_back({{g.x + jitter(rng), g.y + jitter(rng), g.w, g.h}, unit(rng)});
        if (unit(rng) < 0.3) img.dets.push_back({{pos(rng), pos(rng), side(rng), side(rng)}, unit(rng)});
      }
    }
    const MetricReport r = compute_metrics(images);
    violations += !(r.ap <= r.ap50 && r.ar1 <= r.ar10 && r.ar10 <= r.ar100);
  }
  const bool seventh = iou(BBox{0, 0, 2, 2}, BBox{1, 1, 2, 2}) == 1.0 / 7.0;
  report(7, toy_err <= 1e-9 && violations == 0 && seventh,
         "metrics: toy AP within 1e-9, AP <= AP50 and AR1 <= AR10 <= AR100 on 100 sets, IoU = 1/7 exactly",
         fmt("toy AP %.12f (error %.1e), ", toy.ap, toy_err) + std::to_string(violations) + " ordering violations, IoU " +
             (seventh ? "exact" : "inexact"));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> pipeline_outputs(const fs::path& dir) {
  RunConfig cfg;
  cfg.seed = 8008;
  cfg.synth.images = 5;
  cfg.synth.max_pair_iou = 0.2;
  cfg.synth.noise_sigma = 0.1;
  cfg.synth.flip_prob = 0.01;
  cfg.io.output = dir.string();
  cli::cmd_synth(cfg);
  cfg.io.manifest = (dir / "manifest.json").string();
  cfg.io.detections = (dir / "dets.json").string();
  cli::cmd_detect(cfg);
  cfg.io.ground_truth = (dir / "gt.json").string();
  cfg.io.output = (dir / "report.json").string();
  cli::cmd_eval(cfg);
  return {slurp(dir / "gt.json"), slurp(dir / "manifest.json"), slurp(dir / "dets.json"), slurp(dir / "report.json")};
}

void criterion8() {
  const fs::path root = fs::temp_directory_path() / "wsma_acceptance_determinism";
  fs::remove_all(root);
  const auto a = pipeline_outputs(root / "a");
  const auto b = pipeline_outputs(root / "b");
  fs::remove_all(root);
  const bool nonempty = a[2].size() > 3;
  report(8, a == b && nonempty, "synth + detect + eval JSON byte-identical across two runs",
         std::string(a == b ? "identical" : "different") + ", " + std::to_string(a[2].size()) + " bytes of detections");
}

void criterion9() {
  const double levels[] = {0.0, 0.01, 0.05};
  double mean_f1[3] = {0, 0, 0};
  for (int l = 0; l < 3; ++l) {
    for (int s = 0; s < 100; ++s) {
      SceneSpec spec;
      spec.seed = 9000 + s;
      spec.flip_prob = levels[l];
      const Scene scene = generate_scene(spec);
      const Matching m = match_greedy(scored(detect(scene.heatmap)), real(scene.boxes), 0.5);
      mean_f1[l] += f1_score(m.tp, m.fp, m.fn) / 100.0;
    }
  }
  const double tol = 0.005;
  report(9, mean_f1[1] <= mean_f1[0] + tol && mean_f1[2] <= mean_f1[1] + tol,
         "mean F1 non-increasing over flip probability 0, 0.01, 0.05 (tolerance 0.005)",
         fmt("F1 %.4f, %.4f, %.4f", mean_f1[0], mean_f1[1], mean_f1[2]));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
