#ifndef WSMA_MSPSEG_HPP
#define WSMA_MSPSEG_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "wsma/error.hpp"

namespace wsma {

/// H x W x C tensor, row-major with channels fastest.
class FeatureMap {
public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels, double fill = 0.0)
      : height_(height), width_(width), channels_(channels) {
    if (height <= 0 || width <= 0 || channels <= 0) {
      throw Error(ErrorCode::ShapeMismatch, "feature map dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int y, int x, int c) { return data_[index(y, x, c)]; }
  double operator()(int y, int x, int c) const { return data_[index(y, x, c)]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const FeatureMap& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

inline constexpr std::array<int, 4> kPoolKernels{1, 3, 5, 7};

/// Parameters of the 1x1 convolution that maps the 4C concatenated pooling
/// channels back to C. weights is (4C) x C row-major: weights[q * C + c]
/// links input channel q to output channel c. Input channel q = branch * C +
/// c_in with branches ordered by kernel size 1, 3, 5, 7.
struct MspBlockParams {
  int channels = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  MspBlockParams() = default;
  explicit MspBlockParams(int c)
      : channels(c), weights(static_cast<std::size_t>(4 * c) * c, 0.0), bias(static_cast<std::size_t>(c), 0.0) {}

  double& weight(int q, int c) { return weights[static_cast<std::size_t>(q) * channels + c]; }
  double weight(int q, int c) const { return weights[static_cast<std::size_t>(q) * channels + c]; }

  void validate() const {
    if (channels <= 0 || weights.size() != static_cast<std::size_t>(4 * channels) * channels ||
        bias.size() != static_cast<std::size_t>(channels)) {
      throw Error(ErrorCode::ShapeMismatch, "block parameters do not match channel count " + std::to_string(channels));
    }
    for (double v : weights) {
      if (!std::isfinite(v)) throw Error(ErrorCode::BadArgument, "non-finite block weight");
    }
    for (double v : bias) {
      if (!std::isfinite(v)) throw Error(ErrorCode::BadArgument, "non-finite block bias");
    }
  }

  friend bool operator==(const MspBlockParams&, const MspBlockParams&) = default;
};

/// Stride-1 average pooling with zero padding: every output is the sum of
/// the k x k window centered on it divided by k*k, padded samples included.
inline FeatureMap avg_pool_same(const FeatureMap& x, int k) {
  if (std::find(kPoolKernels.begin(), kPoolKernels.end(), k) == kPoolKernels.end()) {
    throw Error(ErrorCode::BadKernel, "pooling kernel must be one of 1, 3, 5, 7; got " + std::to_string(k));
  }
  if (k == 1) return x;
  const int r = k / 2;
  const double inv = 1.0 / (static_cast<double>(k) * k);
  const int h = x.height();
  const int w = x.width();
  const int ch = x.channels();

  // Separable box sum: rows first, then columns.
  FeatureMap rows(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = xx + dx;
          if (sx >= 0 && sx < w) s += x(y, sx, c);
        }
        rows(y, xx, c) = s;
      }
    }
  }
  FeatureMap out(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          const int sy = y + dy;
          if (sy >= 0 && sy < h) s += rows(sy, xx, c);
        }
        out(y, xx, c) = s * inv;
      }
    }
  }
  return out;
}

namespace detail {

inline void check_block_shapes(const FeatureMap& x, const MspBlockParams& p) {
  p.validate();
  if (x.channels() != p.channels) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.channels()) +
                                              " channels, block expects " + std::to_string(p.channels));
  }
}

inline std::array<FeatureMap, 4> pool_branches(const FeatureMap& x) {
  return {avg_pool_same(x, 1), avg_pool_same(x, 3), avg_pool_same(x, 5), avg_pool_same(x, 7)};
}

}  // namespace detail

/// y = x + conv1x1(concat(pool1(x), pool3(x), pool5(x), pool7(x))).
inline FeatureMap msp_block_forward(const FeatureMap& x, const MspBlockParams& p) {
  detail::check_block_shapes(x, p);
  const auto branches = detail::pool_branches(x);
  const int ch = x.channels();
  FeatureMap y = x;
  for (int yy = 0; yy < x.height(); ++yy) {
    for (int xx = 0; xx < x.width(); ++xx) {
      for (int c = 0; c < ch; ++c) {
        double z = p.bias[c];
        for (int b = 0; b < 4; ++b) {
          for (int ci = 0; ci < ch; ++ci) z += p.weight(b * ch + ci, c) * branches[b](yy, xx, ci);
        }
        y(yy, xx, c) += z;
      }
    }
  }
  return y;
}

struct MspGradients {
  std::vector<double> weights;
  std::vector<double> bias;
  FeatureMap input;
};

/// Backpropagates grad_out (dLoss/dy) through the block.
inline MspGradients msp_block_backward(const FeatureMap& x, const MspBlockParams& p, const FeatureMap& grad_out) {
  detail::check_block_shapes(x, p);
  if (!grad_out.same_shape(x)) throw Error(ErrorCode::ShapeMismatch, "gradient shape differs from input shape");
  const auto branches = detail::pool_branches(x);
  const int ch = x.channels();
  MspGradients g{std::vector<double>(p.weights.size(), 0.0), std::vector<double>(p.bias.size(), 0.0), grad_out};

  // dLoss/d(concat) per branch, before pooling's adjoint.
  std::array<FeatureMap, 4> d_branch{FeatureMap(x.height(), x.width(), ch), FeatureMap(x.height(), x.width(), ch),
                                     FeatureMap(x.height(), x.width(), ch), FeatureMap(x.height(), x.width(), ch)};
  for (int yy = 0; yy < x.height(); ++yy) {
    for (int xx = 0; xx < x.width(); ++xx) {
      for (int c = 0; c < ch; ++c) {
        const double go = grad_out(yy, xx, c);
        g.bias[c] += go;
        for (int b = 0; b < 4; ++b) {
          for (int ci = 0; ci < ch; ++ci) {
            const int q = b * ch + ci;
            g.weights[static_cast<std::size_t>(q) * ch + c] += branches[b](yy, xx, ci) * go;
            d_branch[b](yy, xx, ci) += p.weight(q, c) * go;
          }
        }
      }
    }
  }
  // Zero-padded average pooling with a symmetric window is self-adjoint.
  for (int b = 0; b < 4; ++b) {
    const FeatureMap back = avg_pool_same(d_branch[b], kPoolKernels[b]);
    for (std::size_t i = 0; i < back.size(); ++i) g.input.data()[i] += back.data()[i];
  }
  return g;
}

inline double sum_of_squares(const FeatureMap& y) {
  double s = 0.0;
  for (double v : y.data()) s += v * v;
  return s;
}

/// Analytic gradient of sum(y^2) with respect to weights, bias and input.
inline MspGradients msp_block_loss_gradients(const FeatureMap& x, const MspBlockParams& p) {
  FeatureMap g = msp_block_forward(x, p);
  for (double& v : g.data()) v *= 2.0;
  return msp_block_backward(x, p, g);
}

struct GradCheckReport {
  double weights = 0.0;
  double bias = 0.0;
  double input = 0.0;

  double max() const noexcept { return std::max({weights, bias, input}); }
};

/// Denominator floor of the relative error, so entries whose true gradient
/// is (near) zero are judged on absolute error instead.
inline constexpr double kGradRelFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradRelFloor});
}

/// Compares analytic gradients of sum(y^2) to central differences for every
/// weight, bias and input element.
inline GradCheckReport msp_block_grad_check(const FeatureMap& x, const MspBlockParams& p, double eps = 1e-4) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) {
    throw Error(ErrorCode::BadArgument, "finite-difference step must lie in [1e-6, 1e-3]");
  }
  const MspGradients analytic = msp_block_loss_gradients(x, p);
  GradCheckReport report;

  // Work on copies so the caller's values are untouched.
  MspBlockParams q = p;
  FeatureMap xin = x;
  auto loss_at = [&]() { return sum_of_squares(msp_block_forward(xin, q)); };
  auto diff = [&](double& slot) {
    const double saved = slot;
    slot = saved + eps;
    const double up = loss_at();
    slot = saved - eps;
    const double down = loss_at();
    slot = saved;
    return (up - down) / (2.0 * eps);
  };

  for (std::size_t i = 0; i < q.weights.size(); ++i) {
    report.weights = std::max(report.weights, relative_error(analytic.weights[i], diff(q.weights[i])));
  }
  for (std::size_t i = 0; i < q.bias.size(); ++i) {
    report.bias = std::max(report.bias, relative_error(analytic.bias[i], diff(q.bias[i])));
  }
  for (std::size_t i = 0; i < xin.size(); ++i) {
    report.input = std::max(report.input, relative_error(analytic.input.data()[i], diff(xin.data()[i])));
  }
  return report;
}

// Parameter blob: 16-byte header {"MSPB", version u32, C u32, reserved u32}
// followed by little-endian float64 weights (row-major) then bias.

inline constexpr std::uint32_t kMspBlobVersion = 1;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

inline void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::Parse, "truncated block parameter header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorCode::Parse, "truncated block parameter payload");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace detail

inline void write_msp_params(std::ostream& out, const MspBlockParams& p) {
  p.validate();
  out.write("MSPB", 4);
  detail::put_u32(out, kMspBlobVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(p.channels));
  detail::put_u32(out, 0);
  for (double v : p.weights) detail::put_f64(out, v);
  for (double v : p.bias) detail::put_f64(out, v);
  if (!out) throw Error(ErrorCode::Io, "failed writing block parameters");
}

inline MspBlockParams read_msp_params(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "MSPB") {
    throw Error(ErrorCode::Parse, "block parameter blob lacks MSPB magic");
  }
  const std::uint32_t version = detail::get_u32(in);
  if (version != kMspBlobVersion) {
    throw Error(ErrorCode::Parse, "unsupported block parameter version " + std::to_string(version));
  }
  const std::uint32_t c = detail::get_u32(in);
  (void)detail::get_u32(in);
  if (c == 0 || c > 4096) throw Error(ErrorCode::Parse, "implausible channel count " + std::to_string(c));
  MspBlockParams p(static_cast<int>(c));
  for (double& v : p.weights) v = detail::get_f64(in);
  for (double& v : p.bias) v = detail::get_f64(in);
  p.validate();
  return p;
}

}  // namespace wsma

#endif  // WSMA_MSPSEG_HPP
