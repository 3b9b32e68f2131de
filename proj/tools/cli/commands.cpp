#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "wsma/io/coco.hpp"
#include "wsma/io/pnm.hpp"
#include "wsma/wsma.hpp"

namespace fs = std::filesystem;

namespace wsma::cli {
namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("WSMA_LOG");
    return env ? std::atoi(env) : 0;
  }();
  return level;
}

void log(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "[wsma] " << msg << '\n';
}

int worker_count(const RunConfig& cfg, std::size_t items) {
  int n = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(items, 1)));
}

/// Runs fn(i) for i in [0, n) on a bounded pool. If any item throws, the
/// exception of the lowest failing index is rethrown after all workers stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void require_path(const std::string& value, const char* what) {
  if (value.empty()) throw Error(ErrorCode::BadArgument, std::string("missing ") + what);
}

void invariant(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvariantViolation, what);
}

std::vector<BBox> image_boxes(const io::CocoDataset& ds, const io::CocoImage& img) {
  std::vector<BBox> boxes;
  for (std::size_t i = 0; i < ds.annotations.size(); ++i) {
    const auto& a = ds.annotations[i];
    if (a.image_id != img.id) continue;
    try {
      boxes.push_back(clamp_box(io::to_pixel_box(a.bbox), img.width, img.height));
    } catch (const Error& e) {
      throw Error(e.code(), io::describe(a, i) + ": " + e.what());
    }
  }
  return boxes;
}

}  // namespace

std::uint64_t scene_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 of (base, index)
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void cmd_annotate(const RunConfig& cfg, bool split) {
  require_path(cfg.io.ground_truth, "ground truth (--gt)");
  require_path(cfg.io.output, "output directory (--out)");
  const io::CocoDataset ds = io::load_coco(cfg.io.ground_truth);

  std::set<std::int64_t> ids;
  for (const auto& img : ds.images) ids.insert(img.id);
  for (std::size_t i = 0; i < ds.annotations.size(); ++i) {
    if (!ids.count(ds.annotations[i].image_id)) {
      throw Error(ErrorCode::Parse, io::describe(ds.annotations[i], i) + ": unknown image_id " +
                                        std::to_string(ds.annotations[i].image_id));
    }
  }
  // Validate every box up front so a bad record fails before any file is written.
  std::vector<std::vector<BBox>> boxes;
  for (const auto& img : ds.images) boxes.push_back(image_boxes(ds, img));

  fs::create_directories(cfg.io.output);
  io::Manifest manifest{cfg.ring_width, {}};
  for (const auto& img : ds.images) {
    const std::string stem = io::output_stem(img.file_name);
    manifest.images.push_back({img.id, img.file_name, img.width, img.height, split ? stem : stem + ".ppm"});
  }

  parallel_for(ds.images.size(), worker_count(cfg, ds.images.size()), [&](std::size_t i) {
    const auto& img = ds.images[i];
    const MultimodalMask mask = make_multimodal(boxes[i], img.width, img.height, cfg.ring_width);
    invariant(is_subset(mask.boundary_on_interior, mask.interior),
              "boundary-on-interior escapes the interior channel for image " + std::to_string(img.id));
    const std::string target = (fs::path(cfg.io.output) / manifest.images[i].heatmap).string();
    if (split) {
      io::write_mask_split(target, mask);
    } else {
      io::write_mask(target, mask);
    }
    log(2, "annotated " + img.file_name);
  });

  io::save_json((fs::path(cfg.io.output) / "manifest.json").string(), io::to_json(manifest));
  log(1, "annotate: wrote " + std::to_string(ds.images.size()) + " masks to " + cfg.io.output);
}

void cmd_detect(const RunConfig& cfg) {
  require_path(cfg.io.manifest, "manifest (--manifest)");
  require_path(cfg.io.detections, "detections output (--dets)");
  const io::Manifest manifest = io::parse_manifest(io::load_json(cfg.io.manifest));
  const fs::path base = fs::path(cfg.io.manifest).parent_path();
  const DetectParams params = cfg.detect_params();

  std::vector<std::vector<Detection>> per_image(manifest.images.size());
  parallel_for(manifest.images.size(), worker_count(cfg, manifest.images.size()), [&](std::size_t i) {
    const auto& e = manifest.images[i];
    const std::string path = (base / e.heatmap).string();
    const MultimodalHeatmap hm = e.heatmap.ends_with(".ppm") ? io::read_heatmap(path) : io::read_heatmap_split(path);
    if (hm.width() != e.width || hm.height() != e.height) {
      throw Error(ErrorCode::DimensionMismatch, path + " is " + std::to_string(hm.width()) + "x" +
                                                    std::to_string(hm.height()) + ", manifest says " +
                                                    std::to_string(e.width) + "x" + std::to_string(e.height));
    }
    per_image[i] = detect(hm, params);
    for (const auto& d : per_image[i]) {
      invariant(d.box.x >= 0 && d.box.y >= 0 && d.box.right() <= e.width && d.box.bottom() <= e.height,
                "detection outside image " + std::to_string(e.image_id));
      invariant(d.score >= 0.0 && d.score <= 1.0, "score outside [0, 1]");
    }
    log(2, e.file_name + ": " + std::to_string(per_image[i].size()) + " detections");
  });

  std::vector<io::ImageDetection> all;
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    for (const auto& d : per_image[i]) all.push_back({manifest.images[i].image_id, d});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const io::ImageDetection& a, const io::ImageDetection& b) { return a.det.score > b.det.score; });
  io::save_json(cfg.io.detections, io::detections_to_json(all));
  log(1, "detect: " + std::to_string(all.size()) + " detections over " + std::to_string(per_image.size()) + " images");
}

std::string cmd_eval(const RunConfig& cfg) {
  require_path(cfg.io.ground_truth, "ground truth (--gt)");
  require_path(cfg.io.detections, "detections (--dets)");
  const io::CocoDataset gt = io::load_coco(cfg.io.ground_truth);
  const auto dets = io::parse_detections(io::load_json(cfg.io.detections));

  std::map<std::int64_t, std::size_t> slot;
  std::vector<ImageEval> images(gt.images.size());
  for (std::size_t i = 0; i < gt.images.size(); ++i) slot[gt.images[i].id] = i;
  for (std::size_t i = 0; i < gt.annotations.size(); ++i) {
    const auto& a = gt.annotations[i];
    const auto it = slot.find(a.image_id);
    if (it == slot.end()) {
      throw Error(ErrorCode::Parse, io::describe(a, i) + ": unknown image_id " + std::to_string(a.image_id));
    }
    images[it->second].gts.push_back(a.bbox);
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const auto it = slot.find(dets[i].image_id);
    if (it == slot.end()) {
      throw Error(ErrorCode::Parse, "detections[" + std::to_string(i) + "]: image_id " +
                                        std::to_string(dets[i].image_id) + " is not in the ground truth");
    }
    images[it->second].dets.push_back({dets[i].bbox, dets[i].score});
  }

  const MetricReport r = compute_metrics(images, cfg.iou_thresh);
  const std::string table = format_report(r);

  if (!cfg.io.output.empty()) {
    io::Json metrics = {{"ap", r.ap},     {"ap50", r.ap50},   {"ap75", r.ap75},   {"ap_s", r.ap_s},
                        {"ap_m", r.ap_m}, {"ap_l", r.ap_l},   {"ar1", r.ar1},     {"ar10", r.ar10},
                        {"ar100", r.ar100}, {"ar_s", r.ar_s}, {"ar_m", r.ar_m},   {"ar_l", r.ar_l},
                        {"f1_at_50", r.f1_at_50}};
    io::Json report = {
        {"metrics", metrics},
        {"counts", {{"images", gt.images.size()}, {"ground_truth", gt.annotations.size()}, {"detections", dets.size()}}},
        {"params", {{"f1_iou", cfg.iou_thresh}, {"ap_points", 101}, {"max_dets", 100}}},
        {"model",
         {{"stack", cfg.model.stack}, {"base", cfg.model.base}, {"depth", cfg.model.depth}, {"stem", cfg.model.stem}}},
    };
    const fs::path out(cfg.io.output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    io::save_json(out.string(), report);
    fs::path txt = out;
    txt.replace_extension(".txt");
    std::ofstream t(txt);
    if (!t) throw Error(ErrorCode::Io, "cannot open " + txt.string() + " for writing");
    t << table;
  }
  return table;
}

void cmd_synth(const RunConfig& cfg) {
  require_path(cfg.io.output, "output directory (--out)");
  const int n = cfg.synth.images;
  // Validate once before spending time on generation.
  cfg.scene_spec(cfg.seed).validate();
  fs::create_directories(cfg.io.output);

  std::vector<Scene> scenes(static_cast<std::size_t>(n));
  std::vector<std::string> stems(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), worker_count(cfg, static_cast<std::size_t>(n)), [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%05zu", i);
    stems[i] = name;
    Scene s = generate_scene(cfg.scene_spec(scene_seed(cfg.seed, i)));
    io::write_heatmap((fs::path(cfg.io.output) / (stems[i] + ".ppm")).string(), s.heatmap);
    s.heatmap = {};  // keep only the boxes
    scenes[i] = std::move(s);
  });

  io::CocoDataset gt;
  io::Manifest manifest{cfg.ring_width, {}};
  std::int64_t ann_id = 1;
  for (int i = 0; i < n; ++i) {
    const std::int64_t id = i + 1;
    const std::string file_name = stems[i] + ".png";
    gt.images.push_back({id, file_name, cfg.synth.width, cfg.synth.height});
    manifest.images.push_back({id, file_name, cfg.synth.width, cfg.synth.height, stems[i] + ".ppm"});
    for (const BBox& b : scenes[i].boxes) gt.annotations.push_back({ann_id++, id, to_real(b), 1});
  }
  io::save_json((fs::path(cfg.io.output) / "gt.json").string(), io::to_json(gt));
  io::save_json((fs::path(cfg.io.output) / "manifest.json").string(), io::to_json(manifest));
  log(1, "synth: wrote " + std::to_string(n) + " scenes to " + cfg.io.output);
}

nlohmann::ordered_json cmd_bench(const RunConfig& cfg, const BenchOptions& opts) {
  using Clock = std::chrono::steady_clock;
  FollowStats stats;
  std::vector<ContourSet> rdb;
  BinaryMask mask;
  double rdb_seconds = 0.0;
  std::string source;

  if (!opts.mask_path.empty()) {
    source = opts.mask_path;
    // Streamed straight from disk: the follower never sees the whole image.
    io::PgmRowReader rows(opts.mask_path);
    const auto t0 = Clock::now();
    rdb = rdb_follow(rows, cfg.contour_mode, &stats);
    rdb_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    mask = io::read_binary(opts.mask_path);
  } else {
    source = "synthetic";
    SceneSpec spec;
    spec.image_w = opts.width;
    spec.image_h = opts.height;
    spec.n_objects = opts.blobs;
    spec.size_min = 60;
    spec.size_max = 110;
    spec.max_pair_iou = 0.0;
    spec.seed = cfg.seed;
    spec.ring_width = cfg.ring_width;
    std::mt19937_64 rng(spec.seed);
    mask = make_multimodal(place_boxes(spec, rng), spec.image_w, spec.image_h, spec.ring_width).interior;
    MaskRowReader rows(mask);
    const auto t0 = Clock::now();
    rdb = rdb_follow(rows, cfg.contour_mode, &stats);
    rdb_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }

  const auto t1 = Clock::now();
  const std::vector<ContourSet> baseline = border_follow_baseline(mask);
  const double baseline_seconds = std::chrono::duration<double>(Clock::now() - t1).count();

  const std::size_t bound = 2 * stats.max_runs_per_row;
  nlohmann::ordered_json j;
  j["source"] = source;
  j["width"] = mask.width();
  j["height"] = mask.height();
  j["contour_mode"] = std::string(to_string(cfg.contour_mode));
  j["rdb"] = {{"components", rdb.size()},
              {"seconds", rdb_seconds},
              {"peak_run_records", stats.peak_run_records},
              {"max_runs_per_row", stats.max_runs_per_row},
              {"run_record_bound", bound},
              {"within_bound", stats.peak_run_records <= bound}};
  j["baseline"] = {{"components", baseline.size()}, {"seconds", baseline_seconds}};
  j["components_agree"] = rdb.size() == baseline.size();
  j["time_ratio_baseline_over_rdb"] = rdb_seconds > 0.0 ? baseline_seconds / rdb_seconds : 0.0;
  return j;
}

namespace {

struct Overrides {
  std::string config_path;
  int ring_width = 0;
  double threshold = 0.0;
  std::string merge_mode;
  std::string contour_mode;
  int min_pixels = 0;
  double iou = 0.0;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::vector<CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts.clear();
    opts.push_back(app->add_option("--config", config_path, "JSON run configuration (flags override it)"));
    opts.push_back(app->add_option("--ring-width", ring_width, "Boundary ring width in pixels"));
    opts.push_back(app->add_option("--threshold", threshold, "Heatmap binarization threshold in (0,1)"));
    opts.push_back(app->add_option("--merge-mode", merge_mode, "literal | robust")
                       ->check(CLI::IsMember({"literal", "robust"})));
    opts.push_back(app->add_option("--contour-mode", contour_mode, "literal | robust")
                       ->check(CLI::IsMember({"literal", "robust"})));
    opts.push_back(app->add_option("--min-pixels", min_pixels, "Smallest instance kept, in pixels"));
    opts.push_back(app->add_option("--iou", iou, "IoU threshold for F1 matching"));
    opts.push_back(app->add_option("--seed", seed, "Random seed"));
    opts.push_back(app->add_option("--jobs", jobs, "Worker threads (0: all cores)"));
  }

  bool given(const char* name, CLI::App* app) const { return app->get_option(name)->count() > 0; }

  RunConfig resolve(CLI::App* app) const {
    RunConfig cfg;
    if (given("--config", app)) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + config_path);
      std::stringstream text;
      text << in.rdbuf();
      cfg = parse_config(text.str());
    }
    if (given("--ring-width", app)) cfg.ring_width = ring_width;
    if (given("--threshold", app)) cfg.threshold = threshold;
    if (given("--merge-mode", app)) cfg.merge_mode = *parse_merge_mode(merge_mode);
    if (given("--contour-mode", app)) cfg.contour_mode = *parse_contour_mode(contour_mode);
    if (given("--min-pixels", app)) cfg.min_pixels = min_pixels;
    if (given("--iou", app)) cfg.iou_thresh = iou;
    if (given("--seed", app)) cfg.seed = seed;
    if (given("--jobs", app)) cfg.jobs = jobs;
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Anchor-free, NMS-free detection from multimodal segmentation heatmaps"};
  app.require_subcommand(1);

  std::string gt, out, manifest, dets, mask, dump_config;
  bool split = false;
  RunConfig::Synth synth;
  BenchOptions bench;

  std::map<CLI::App*, Overrides> overrides;
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    overrides[s].attach(s);
    s->add_option("--dump-config", dump_config, "Write the effective configuration to this path");
    return s;
  };

  CLI::App* annotate = sub("annotate", "Convert box annotations into multimodal masks");
  annotate->add_option("--gt", gt, "COCO-style ground truth JSON");
  annotate->add_option("--out", out, "Output directory");
  annotate->add_flag("--split", split, "Write three single-channel images per image");

  CLI::App* detect_cmd = sub("detect", "Heatmaps -> instance map -> contours -> boxes");
  detect_cmd->add_option("--manifest", manifest, "Manifest listing the heatmaps");
  detect_cmd->add_option("--dets,--out", dets, "Detections JSON to write");

  CLI::App* eval = sub("eval", "AP/AR/F1 of detections against ground truth");
  eval->add_option("--gt", gt, "COCO-style ground truth JSON");
  eval->add_option("--dets", dets, "Detections JSON");
  eval->add_option("--out", out, "Metric report JSON (a .txt table is written beside it)");

  CLI::App* synth_cmd = sub("synth", "Generate synthetic scenes with ground truth and heatmaps");
  synth_cmd->add_option("--out", out, "Output directory");
  synth_cmd->add_option("--images", synth.images, "Number of scenes");
  synth_cmd->add_option("--width", synth.width, "Scene width");
  synth_cmd->add_option("--height", synth.height, "Scene height");
  synth_cmd->add_option("--objects", synth.objects, "Objects per scene");
  synth_cmd->add_option("--size-min", synth.size_min, "Smallest box side");
  synth_cmd->add_option("--size-max", synth.size_max, "Largest box side");
  synth_cmd->add_option("--max-iou", synth.max_pair_iou, "Largest IoU allowed between two boxes");
  synth_cmd->add_option("--noise", synth.noise_sigma, "Gaussian noise sigma");
  synth_cmd->add_option("--flip", synth.flip_prob, "Per-pixel flip probability");

  CLI::App* bench_cmd = sub("bench", "Time run-data-based following against border following");
  bench_cmd->add_option("--mask", mask, "Binary mask (PGM); omit for a synthetic scene");
  bench_cmd->add_option("--width", bench.width, "Synthetic mask width");
  bench_cmd->add_option("--height", bench.height, "Synthetic mask height");
  bench_cmd->add_option("--blobs", bench.blobs, "Synthetic blob count");
  bench_cmd->add_option("--out", out, "Report JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    RunConfig cfg = overrides[chosen].resolve(chosen);
    auto set_if = [&](const char* opt, std::string& field, const std::string& value) {
      if (chosen->get_option(opt)->count() > 0) field = value;
    };

    if (chosen == annotate) {
      set_if("--gt", cfg.io.ground_truth, gt);
      set_if("--out", cfg.io.output, out);
    } else if (chosen == detect_cmd) {
      set_if("--manifest", cfg.io.manifest, manifest);
      set_if("--dets", cfg.io.detections, dets);
    } else if (chosen == eval) {
      set_if("--gt", cfg.io.ground_truth, gt);
      set_if("--dets", cfg.io.detections, dets);
      set_if("--out", cfg.io.output, out);
    } else if (chosen == synth_cmd) {
      set_if("--out", cfg.io.output, out);
      if (synth_cmd->get_option("--images")->count()) cfg.synth.images = synth.images;
      if (synth_cmd->get_option("--width")->count()) cfg.synth.width = synth.width;
      if (synth_cmd->get_option("--height")->count()) cfg.synth.height = synth.height;
      if (synth_cmd->get_option("--objects")->count()) cfg.synth.objects = synth.objects;
      if (synth_cmd->get_option("--size-min")->count()) cfg.synth.size_min = synth.size_min;
      if (synth_cmd->get_option("--size-max")->count()) cfg.synth.size_max = synth.size_max;
      if (synth_cmd->get_option("--max-iou")->count()) cfg.synth.max_pair_iou = synth.max_pair_iou;
      if (synth_cmd->get_option("--noise")->count()) cfg.synth.noise_sigma = synth.noise_sigma;
      if (synth_cmd->get_option("--flip")->count()) cfg.synth.flip_prob = synth.flip_prob;
    } else if (chosen == bench_cmd) {
      set_if("--out", cfg.io.output, out);
    }
    cfg.validate();

    if (chosen->get_option("--dump-config")->count() > 0) {
      std::ofstream dump(dump_config);
      if (!dump) throw Error(ErrorCode::Io, "cannot open " + dump_config + " for writing");
      dump << serialize_config(cfg);
    }

    if (chosen == annotate) {
      cmd_annotate(cfg, split);
    } else if (chosen == detect_cmd) {
      cmd_detect(cfg);
    } else if (chosen == eval) {
      std::cout << cmd_eval(cfg);
    } else if (chosen == synth_cmd) {
      cmd_synth(cfg);
    } else if (chosen == bench_cmd) {
      bench.mask_path = mask;
      const std::string report = cmd_bench(cfg, bench).dump(2) + "\n";
      if (cfg.io.output.empty()) {
        std::cout << report;
      } else {
        std::ofstream f(cfg.io.output);
        if (!f) throw Error(ErrorCode::Io, "cannot open " + cfg.io.output + " for writing");
        f << report;
      }
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "wsma: " << e.what() << '\n';
    return e.code() == ErrorCode::InvariantViolation ? kExitInternalError : kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "wsma: internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
}

}  // namespace wsma::cli
