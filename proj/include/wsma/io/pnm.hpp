#ifndef WSMA_IO_PNM_HPP
#define WSMA_IO_PNM_HPP

// Binary PGM (P5, one channel) and PPM (P6, three channels), 8 bits per
// sample. A multimodal heatmap is stored as one PPM with channel order
// interior, boundary, boundary-on-interior; value v maps to round(255 v).

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsma/annotate.hpp"
#include "wsma/error.hpp"
#include "wsma/grid.hpp"
#include "wsma/heatmap.hpp"

namespace wsma::io {

struct PnmHeader {
  int channels = 1;
  int width = 0;
  int height = 0;
};

namespace detail {

inline int read_header_int(std::istream& in, const std::string& path) {
  int c = in.peek();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value) || value < 0) throw Error(ErrorCode::Parse, path + ": malformed PNM header");
  return value;
}

}  // namespace detail

inline PnmHeader read_pnm_header(std::istream& in, const std::string& path) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw Error(ErrorCode::Parse, path + ": not a binary PGM/PPM file");
  }
  PnmHeader h;
  h.channels = magic[1] == '5' ? 1 : 3;
  h.width = detail::read_header_int(in, path);
  h.height = detail::read_header_int(in, path);
  const int maxval = detail::read_header_int(in, path);
  if (h.width <= 0 || h.height <= 0) throw Error(ErrorCode::Parse, path + ": empty image");
  if (maxval != 255) throw Error(ErrorCode::Parse, path + ": only 8-bit images (maxval 255) are supported");
  in.get();  // single whitespace before the raster
  return h;
}

inline void write_pnm(const std::string& path, const PnmHeader& h, std::span<const std::uint8_t> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  out << (h.channels == 1 ? "P5" : "P6") << '\n' << h.width << ' ' << h.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

struct PnmImage {
  PnmHeader header;
  std::vector<std::uint8_t> samples;  // interleaved, row-major
};

inline PnmImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  PnmImage img;
  img.header = read_pnm_header(in, path);
  img.samples.resize(static_cast<std::size_t>(img.header.width) * img.header.height * img.header.channels);
  if (!in.read(reinterpret_cast<char*>(img.samples.data()), static_cast<std::streamsize>(img.samples.size()))) {
    throw Error(ErrorCode::Parse, path + ": truncated raster");
  }
  return img;
}

inline std::uint8_t quantize(double v) {
  const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

inline void write_heatmap(const std::string& path, const MultimodalHeatmap& hm) {
  hm.validate();
  std::vector<std::uint8_t> samples(hm.interior.size() * 3);
  for (std::size_t i = 0; i < hm.interior.size(); ++i) {
    samples[3 * i] = quantize(hm.interior.data()[i]);
    samples[3 * i + 1] = quantize(hm.boundary.data()[i]);
    samples[3 * i + 2] = quantize(hm.boundary_on_interior.data()[i]);
  }
  write_pnm(path, {3, hm.width(), hm.height()}, samples);
}

inline void write_mask(const std::string& path, const MultimodalMask& m) { write_heatmap(path, ideal_heatmaps(m)); }

inline void write_gray(const std::string& path, const ScalarGrid& g) {
  std::vector<std::uint8_t> samples(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) samples[i] = quantize(g.data()[i]);
  write_pnm(path, {1, g.width(), g.height()}, samples);
}

inline void write_binary(const std::string& path, const BinaryMask& m) { write_gray(path, to_scalar(m)); }

/// Three single-channel images <stem>.int.pgm, <stem>.bnd.pgm, <stem>.boi.pgm.
inline void write_mask_split(const std::string& stem, const MultimodalMask& m) {
  write_binary(stem + ".int.pgm", m.interior);
  write_binary(stem + ".bnd.pgm", m.boundary);
  write_binary(stem + ".boi.pgm", m.boundary_on_interior);
}

inline ScalarGrid read_gray(const std::string& path) {
  const PnmImage img = read_pnm(path);
  if (img.header.channels != 1) throw Error(ErrorCode::Parse, path + ": expected a single-channel PGM");
  ScalarGrid g(img.header.width, img.header.height);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = img.samples[i] / 255.0;
  return g;
}

inline MultimodalHeatmap read_heatmap(const std::string& path) {
  const PnmImage img = read_pnm(path);
  if (img.header.channels != 3) throw Error(ErrorCode::Parse, path + ": expected a 3-channel PPM heatmap");
  MultimodalHeatmap hm{ScalarGrid(img.header.width, img.header.height),
                       ScalarGrid(img.header.width, img.header.height),
                       ScalarGrid(img.header.width, img.header.height)};
  for (std::size_t i = 0; i < hm.interior.size(); ++i) {
    hm.interior.data()[i] = img.samples[3 * i] / 255.0;
    hm.boundary.data()[i] = img.samples[3 * i + 1] / 255.0;
    hm.boundary_on_interior.data()[i] = img.samples[3 * i + 2] / 255.0;
  }
  return hm;
}

inline MultimodalHeatmap read_heatmap_split(const std::string& stem) {
  MultimodalHeatmap hm{read_gray(stem + ".int.pgm"), read_gray(stem + ".bnd.pgm"), read_gray(stem + ".boi.pgm")};
  hm.validate();
  return hm;
}

/// Any nonzero sample is foreground.
inline BinaryMask read_binary(const std::string& path) {
  const PnmImage img = read_pnm(path);
  BinaryMask m(img.header.width, img.header.height);
  const int ch = img.header.channels;
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = img.samples[i * ch] != 0;
  return m;
}

/// Streams a binary PGM mask one row at a time; satisfies RowSource. Only a
/// single row is buffered.
class PgmRowReader {
public:
  explicit PgmRowReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error(ErrorCode::Io, "cannot open " + path);
    header_ = read_pnm_header(in_, path);
    if (header_.channels != 1) throw Error(ErrorCode::Parse, path + ": expected a single-channel PGM mask");
    row_.resize(static_cast<std::size_t>(header_.width));
  }

  int width() const noexcept { return header_.width; }
  int height() const noexcept { return header_.height; }

  std::optional<std::span<const std::uint8_t>> next() {
    if (y_ >= header_.height) return std::nullopt;
    if (!in_.read(reinterpret_cast<char*>(row_.data()), static_cast<std::streamsize>(row_.size()))) {
      throw Error(ErrorCode::Parse, path_ + ": truncated raster at row " + std::to_string(y_));
    }
    for (auto& v : row_) v = v != 0;
    ++y_;
    return std::span<const std::uint8_t>(row_);
  }

private:
  std::ifstream in_;
  std::string path_;
  PnmHeader header_;
  std::vector<std::uint8_t> row_;
  int y_ = 0;
};

}  // namespace wsma::io

#endif  // WSMA_IO_PNM_HPP
