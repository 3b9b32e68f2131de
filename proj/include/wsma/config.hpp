#ifndef WSMA_CONFIG_HPP
#define WSMA_CONFIG_HPP

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "wsma/annotate.hpp"
#include "wsma/boxes.hpp"
#include "wsma/contour.hpp"
#include "wsma/error.hpp"
#include "wsma/merge.hpp"
#include "wsma/pipeline.hpp"
#include "wsma/synth.hpp"

namespace wsma {

/// Every knob of a CLI run. Serializes to a single JSON document with a fixed
/// key order, so serialize -> parse -> serialize is byte-identical.
struct RunConfig {
  int ring_width = kDefaultRingWidth;
  double threshold = kDefaultThreshold;
  MergeMode merge_mode = MergeMode::Literal;
  ContourMode contour_mode = ContourMode::Robust;
  int min_pixels = kDefaultMinPixels;
  double iou_thresh = 0.5;
  std::uint64_t seed = 0;
  int jobs = 0;  // 0: one worker per hardware thread

  struct Io {
    std::string ground_truth;
    std::string manifest;
    std::string detections;
    std::string output;
  } io;

  struct Synth {
    int images = 10;
    int width = 512;
    int height = 512;
    int objects = 10;
    int size_min = 16;
    int size_max = 64;
    double max_pair_iou = 0.0;
    double noise_sigma = 0.0;
    double flip_prob = 0.0;
  } synth;

  // Network hyperparameters of the segmentation model that would produce the
  // heatmaps. Not used for computation; echoed into reports.
  struct Model {
    int stack = 2;
    int base = 40;
    int depth = 5;
    bool stem = true;
  } model;

  DetectParams detect_params() const { return {threshold, merge_mode, contour_mode, min_pixels}; }

  SceneSpec scene_spec(std::uint64_t scene_seed) const {
    SceneSpec s;
    s.image_w = synth.width;
    s.image_h = synth.height;
    s.n_objects = synth.objects;
    s.size_min = synth.size_min;
    s.size_max = synth.size_max;
    s.max_pair_iou = synth.max_pair_iou;
    s.noise_sigma = synth.noise_sigma;
    s.flip_prob = synth.flip_prob;
    s.seed = scene_seed;
    s.ring_width = ring_width;
    return s;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::BadArgument, "config: " + what); };
    if (ring_width < 1) fail("ring_width must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) fail("threshold must lie in (0, 1)");
    if (min_pixels < 1) fail("min_pixels must be >= 1");
    if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) fail("iou must lie in (0, 1]");
    if (jobs < 0) fail("jobs must be >= 0");
    if (synth.images < 0) fail("synth.images must be >= 0");
  }
};

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson to_json(const RunConfig& c) {
  OrderedJson j;
  j["ring_width"] = c.ring_width;
  j["threshold"] = c.threshold;
  j["merge_mode"] = std::string(to_string(c.merge_mode));
  j["contour_mode"] = std::string(to_string(c.contour_mode));
  j["min_pixels"] = c.min_pixels;
  j["iou"] = c.iou_thresh;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["io"] = {{"ground_truth", c.io.ground_truth},
             {"manifest", c.io.manifest},
             {"detections", c.io.detections},
             {"output", c.io.output}};
  j["synth"] = {{"images", c.synth.images},           {"width", c.synth.width},
                {"height", c.synth.height},           {"objects", c.synth.objects},
                {"size_min", c.synth.size_min},       {"size_max", c.synth.size_max},
                {"max_pair_iou", c.synth.max_pair_iou}, {"noise_sigma", c.synth.noise_sigma},
                {"flip_prob", c.synth.flip_prob}};
  j["model"] = {{"stack", c.model.stack}, {"base", c.model.base}, {"depth", c.model.depth}, {"stem", c.model.stem}};
  return j;
}

namespace detail {

template <typename T>
void read_key(const OrderedJson& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Parse, "config " + where + key + " has the wrong type");
  }
}

inline void reject_unknown(const OrderedJson& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw Error(ErrorCode::Parse, "config: unknown key " + where + key);
  }
}

}  // namespace detail

/// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const OrderedJson& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "config must be a JSON object");
  detail::reject_unknown(j, {"ring_width", "threshold", "merge_mode", "contour_mode", "min_pixels", "iou", "seed",
                             "jobs", "io", "synth", "model"},
                         "");
  RunConfig c;
  detail::read_key(j, "ring_width", c.ring_width, "");
  detail::read_key(j, "threshold", c.threshold, "");
  detail::read_key(j, "min_pixels", c.min_pixels, "");
  detail::read_key(j, "iou", c.iou_thresh, "");
  detail::read_key(j, "seed", c.seed, "");
  detail::read_key(j, "jobs", c.jobs, "");
  if (j.contains("merge_mode")) {
    std::string s;
    detail::read_key(j, "merge_mode", s, "");
    const auto m = parse_merge_mode(s);
    if (!m) throw Error(ErrorCode::Parse, "config: merge_mode must be literal or robust, got " + s);
    c.merge_mode = *m;
  }
  if (j.contains("contour_mode")) {
    std::string s;
    detail::read_key(j, "contour_mode", s, "");
    const auto m = parse_contour_mode(s);
    if (!m) throw Error(ErrorCode::Parse, "config: contour_mode must be literal or robust, got " + s);
    c.contour_mode = *m;
  }
  if (j.contains("io")) {
    const auto& io = j["io"];
    detail::reject_unknown(io, {"ground_truth", "manifest", "detections", "output"}, "io.");
    detail::read_key(io, "ground_truth", c.io.ground_truth, "io.");
    detail::read_key(io, "manifest", c.io.manifest, "io.");
    detail::read_key(io, "detections", c.io.detections, "io.");
    detail::read_key(io, "output", c.io.output, "io.");
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    detail::reject_unknown(s, {"images", "width", "height", "objects", "size_min", "size_max", "max_pair_iou",
                               "noise_sigma", "flip_prob"},
                           "synth.");
    detail::read_key(s, "images", c.synth.images, "synth.");
    detail::read_key(s, "width", c.synth.width, "synth.");
    detail::read_key(s, "height", c.synth.height, "synth.");
    detail::read_key(s, "objects", c.synth.objects, "synth.");
    detail::read_key(s, "size_min", c.synth.size_min, "synth.");
    detail::read_key(s, "size_max", c.synth.size_max, "synth.");
    detail::read_key(s, "max_pair_iou", c.synth.max_pair_iou, "synth.");
    detail::read_key(s, "noise_sigma", c.synth.noise_sigma, "synth.");
    detail::read_key(s, "flip_prob", c.synth.flip_prob, "synth.");
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    detail::reject_unknown(m, {"stack", "base", "depth", "stem"}, "model.");
    detail::read_key(m, "stack", c.model.stack, "model.");
    detail::read_key(m, "base", c.model.base, "model.");
    detail::read_key(m, "depth", c.model.depth, "model.");
    detail::read_key(m, "stem", c.model.stem, "model.");
  }
  c.validate();
  return c;
}

inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

inline RunConfig parse_config(const std::string& text) {
  try {
    return config_from_json(OrderedJson::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("config: ") + e.what());
  }
}

}  // namespace wsma

#endif  // WSMA_CONFIG_HPP
