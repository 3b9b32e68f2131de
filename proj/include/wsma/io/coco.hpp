#ifndef WSMA_IO_COCO_HPP
#define WSMA_IO_COCO_HPP

// COCO-style JSON subset:
//   ground truth  {"images": [{id, file_name, width, height}],
//                  "annotations": [{id?, image_id, bbox: [x, y, w, h], category_id}]}
//   detections    [{image_id, bbox: [x, y, w, h], score, category_id}]
//   manifest      {"ring_width": w, "images": [{image_id, file_name, width, height, heatmap}]}

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsma/boxes.hpp"
#include "wsma/error.hpp"
#include "wsma/iou.hpp"
#include "wsma/raster.hpp"

namespace wsma::io {

using Json = nlohmann::ordered_json;

struct CocoImage {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct CocoAnnotation {
  std::int64_t id = -1;  // -1 when the file omits it
  std::int64_t image_id = 0;
  RealBox bbox;
  int category_id = 1;
};

struct CocoDataset {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;

  std::vector<const CocoAnnotation*> annotations_for(std::int64_t image_id) const {
    std::vector<const CocoAnnotation*> out;
    for (const auto& a : annotations) {
      if (a.image_id == image_id) out.push_back(&a);
    }
    return out;
  }
};

inline std::string describe(const CocoAnnotation& a, std::size_t index) {
  std::string s = "annotations[" + std::to_string(index) + "]";
  if (a.id >= 0) s += " (id " + std::to_string(a.id) + ")";
  return s;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

namespace detail {

template <typename T>
T field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(ErrorCode::Parse, where + ": missing \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Parse, where + ": field \"" + std::string(key) + "\" has the wrong type");
  }
}

inline RealBox parse_bbox(const Json& obj, const std::string& where) {
  const auto v = field<std::vector<double>>(obj, "bbox", where);
  if (v.size() != 4) throw Error(ErrorCode::Parse, where + ": bbox must have 4 numbers");
  for (double d : v) {
    if (!std::isfinite(d)) throw Error(ErrorCode::Parse, where + ": bbox holds a non-finite value");
  }
  return {v[0], v[1], v[2], v[3]};
}

inline Json bbox_json(const BBox& b) { return Json::array({b.x, b.y, b.w, b.h}); }

}  // namespace detail

inline CocoDataset parse_coco(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "ground truth must be a JSON object");
  CocoDataset ds;
  if (!j.contains("images") || !j["images"].is_array()) throw Error(ErrorCode::Parse, "missing \"images\" array");
  for (std::size_t i = 0; i < j["images"].size(); ++i) {
    const Json& rec = j["images"][i];
    const std::string where = "images[" + std::to_string(i) + "]";
    CocoImage img;
    img.id = detail::field<std::int64_t>(rec, "id", where);
    img.file_name = detail::field<std::string>(rec, "file_name", where);
    img.width = detail::field<int>(rec, "width", where);
    img.height = detail::field<int>(rec, "height", where);
    if (img.width <= 0 || img.height <= 0) {
      throw Error(ErrorCode::Parse, where + " (id " + std::to_string(img.id) + "): non-positive image size");
    }
    for (const auto& other : ds.images) {
      if (other.id == img.id) throw Error(ErrorCode::Parse, where + ": duplicate image id " + std::to_string(img.id));
    }
    ds.images.push_back(img);
  }
  if (j.contains("annotations")) {
    if (!j["annotations"].is_array()) throw Error(ErrorCode::Parse, "\"annotations\" must be an array");
    for (std::size_t i = 0; i < j["annotations"].size(); ++i) {
      const Json& rec = j["annotations"][i];
      std::string where = "annotations[" + std::to_string(i) + "]";
      CocoAnnotation a;
      if (rec.is_object() && rec.contains("id")) {
        a.id = detail::field<std::int64_t>(rec, "id", where);
        where += " (id " + std::to_string(a.id) + ")";
      }
      a.image_id = detail::field<std::int64_t>(rec, "image_id", where);
      a.bbox = detail::parse_bbox(rec, where);
      if (rec.contains("category_id")) a.category_id = detail::field<int>(rec, "category_id", where);
      ds.annotations.push_back(a);
    }
  }
  return ds;
}

inline CocoDataset load_coco(const std::string& path) {
  try {
    return parse_coco(load_json(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw Error(ErrorCode::Parse, path + ": " + e.what());
    throw;
  }
}

inline Json to_json(const CocoDataset& ds) {
  Json images = Json::array();
  for (const auto& img : ds.images) {
    images.push_back({{"id", img.id}, {"file_name", img.file_name}, {"width", img.width}, {"height", img.height}});
  }
  Json anns = Json::array();
  for (const auto& a : ds.annotations) {
    Json rec;
    if (a.id >= 0) rec["id"] = a.id;
    rec["image_id"] = a.image_id;
    rec["bbox"] = Json::array({a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h});
    rec["category_id"] = a.category_id;
    anns.push_back(std::move(rec));
  }
  return {{"images", images}, {"annotations", anns}};
}

/// Rounds the real box edges to the pixel grid. Throws EmptyAfterClamp when
/// the rounded box has no area.
inline BBox to_pixel_box(const RealBox& b) {
  const int x0 = static_cast<int>(std::floor(b.x + 0.5));
  const int y0 = static_cast<int>(std::floor(b.y + 0.5));
  const int x1 = static_cast<int>(std::floor(b.x + b.w + 0.5));
  const int y1 = static_cast<int>(std::floor(b.y + b.h + 0.5));
  if (x1 <= x0 || y1 <= y0) {
    throw Error(ErrorCode::EmptyAfterClamp, "box [" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " +
                                                std::to_string(b.w) + ", " + std::to_string(b.h) + "] has no area");
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

struct ImageDetection {
  std::int64_t image_id = 0;
  Detection det;
};

inline Json detections_to_json(const std::vector<ImageDetection>& dets) {
  Json out = Json::array();
  for (const auto& d : dets) {
    out.push_back({{"image_id", d.image_id},
                   {"bbox", detail::bbox_json(d.det.box)},
                   {"score", d.det.score},
                   {"category_id", d.det.class_id}});
  }
  return out;
}

/// Detections as read back from a results file; boxes may be real-valued.
struct DetectionRecord {
  std::int64_t image_id = 0;
  RealBox bbox;
  double score = 0.0;
  int category_id = 0;
};

inline std::vector<DetectionRecord> parse_detections(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "detections must be a JSON array");
  std::vector<DetectionRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "detections[" + std::to_string(i) + "]";
    DetectionRecord d;
    d.image_id = detail::field<std::int64_t>(j[i], "image_id", where);
    d.bbox = detail::parse_bbox(j[i], where);
    d.score = detail::field<double>(j[i], "score", where);
    if (j[i].contains("category_id")) d.category_id = detail::field<int>(j[i], "category_id", where);
    out.push_back(d);
  }
  return out;
}

struct ManifestEntry {
  std::int64_t image_id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::string heatmap;  // relative to the manifest's directory
};

struct Manifest {
  int ring_width = 0;
  std::vector<ManifestEntry> images;
};

inline Json to_json(const Manifest& m) {
  Json images = Json::array();
  for (const auto& e : m.images) {
    images.push_back({{"image_id", e.image_id},
                      {"file_name", e.file_name},
                      {"width", e.width},
                      {"height", e.height},
                      {"heatmap", e.heatmap}});
  }
  return {{"ring_width", m.ring_width}, {"images", images}};
}

inline Manifest parse_manifest(const Json& j) {
  if (!j.is_object() || !j.contains("images") || !j["images"].is_array()) {
    throw Error(ErrorCode::Parse, "manifest needs an \"images\" array");
  }
  Manifest m;
  if (j.contains("ring_width")) m.ring_width = detail::field<int>(j, "ring_width", "manifest");
  for (std::size_t i = 0; i < j["images"].size(); ++i) {
    const std::string where = "manifest images[" + std::to_string(i) + "]";
    const Json& rec = j["images"][i];
    ManifestEntry e;
    e.image_id = detail::field<std::int64_t>(rec, "image_id", where);
    e.file_name = detail::field<std::string>(rec, "file_name", where);
    e.width = detail::field<int>(rec, "width", where);
    e.height = detail::field<int>(rec, "height", where);
    e.heatmap = detail::field<std::string>(rec, "heatmap", where);
    m.images.push_back(e);
  }
  return m;
}

/// file_name without directory and extension; the stem of every per-image
/// output file.
inline std::string output_stem(const std::string& file_name) {
  return std::filesystem::path(file_name).stem().string();
}

}  // namespace wsma::io

#endif  // WSMA_IO_COCO_HPP
