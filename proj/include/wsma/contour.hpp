#ifndef WSMA_CONTOUR_HPP
#define WSMA_CONTOUR_HPP

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsma/error.hpp"
#include "wsma/grid.hpp"

namespace wsma {

/// Maximal horizontal run of foreground pixels: x_left is the left edge
/// pixel, x_right the right edge pixel (both inclusive).
struct Run {
  int row = 0;
  int x_left = 0;
  int x_right = 0;

  int length() const noexcept { return x_right - x_left + 1; }

  friend bool operator==(const Run&, const Run&) = default;
  friend auto operator<=>(const Run&, const Run&) = default;
};

/// Runs attributed to one object, ordered by (row, x_left).
struct ContourSet {
  int id = 0;
  std::vector<Run> runs;

  std::size_t pixel_count() const noexcept {
    std::size_t n = 0;
    for (const Run& r : runs) n += static_cast<std::size_t>(r.length());
    return n;
  }

  friend bool operator==(const ContourSet&, const ContourSet&) = default;
};

/// literal: a run joins the set of the first previous-row run whose left and
/// right edges are each within one column of its own, otherwise it opens a
/// new set; sets are never merged.
/// robust: a run joins every previous-row run it touches 8-connectedly and
/// the touched sets are merged, i.e. run-length 8-connected labeling.
enum class ContourMode { Literal, Robust };

constexpr std::string_view to_string(ContourMode m) {
  return m == ContourMode::Literal ? "literal" : "robust";
}

inline std::optional<ContourMode> parse_contour_mode(std::string_view s) {
  if (s == "literal") return ContourMode::Literal;
  if (s == "robust") return ContourMode::Robust;
  return std::nullopt;
}

/// Appends the maximal runs of one row. Out-of-image neighbors count as
/// background.
inline void append_runs(std::span<const std::uint8_t> row, int y, std::vector<Run>& out) {
  const int w = static_cast<int>(row.size());
  int x = 0;
  while (x < w) {
    if (!row[x]) {
      ++x;
      continue;
    }
    const int left = x;
    while (x + 1 < w && row[x + 1]) ++x;
    out.push_back({y, left, x});
    ++x;
  }
}

inline std::vector<Run> scan_runs(const BinaryMask& mask, int row) {
  if (row < 0 || row >= mask.height()) {
    throw Error(ErrorCode::RowOutOfRange,
                "row " + std::to_string(row) + " outside [0, " + std::to_string(mask.height()) + ")");
  }
  std::vector<Run> runs;
  append_runs(mask.row(row), row, runs);
  return runs;
}

/// A forward-only source of image rows. next() hands out each row once, top
/// to bottom, and returns nullopt after the last one.
template <typename R>
concept RowSource = requires(R r) {
  { r.width() } -> std::convertible_to<int>;
  { r.next() } -> std::same_as<std::optional<std::span<const std::uint8_t>>>;
};

/// Single-pass row reader over an in-memory mask.
class MaskRowReader {
public:
  explicit MaskRowReader(const BinaryMask& mask) : mask_(&mask) {}

  int width() const noexcept { return mask_->width(); }

  std::optional<std::span<const std::uint8_t>> next() {
    if (y_ >= mask_->height()) return std::nullopt;
    return mask_->row(y_++);
  }

private:
  const BinaryMask* mask_;
  int y_ = 0;
};

/// Run-data-based contour following. Rows are pushed once, in order; only
/// the run records of the previous and the current row are retained while
/// scanning. The runs handed back by finish() are the output, not working
/// state.
class RdbFollower {
public:
  RdbFollower(int width, ContourMode mode) : width_(width), mode_(mode) {}

  void push_row(std::span<const std::uint8_t> row) {
    if (static_cast<int>(row.size()) != width_) {
      throw Error(ErrorCode::DimensionMismatch, "row of width " + std::to_string(row.size()) +
                                                    " pushed into follower of width " + std::to_string(width_));
    }
    scratch_.clear();
    append_runs(row, y_, scratch_);
    cur_.clear();
    cur_.reserve(scratch_.size());

    if (mode_ == ContourMode::Literal) {
      link_literal();
    } else {
      link_robust();
    }

    max_runs_per_row_ = std::max(max_runs_per_row_, cur_.size());
    peak_run_records_ = std::max(peak_run_records_, prev_.size() + cur_.size());
    std::swap(prev_, cur_);
    ++y_;
  }

  /// Consumes the follower. Sets are ordered by their first run (row, then
  /// x_left) and numbered from 0 in that order.
  std::vector<ContourSet> finish() {
    std::vector<ContourSet> sets;
    for (std::size_t label = 0; label < runs_by_label_.size(); ++label) {
      auto& runs = runs_by_label_[label];
      if (runs.empty()) continue;
      std::sort(runs.begin(), runs.end());
      sets.push_back({0, std::move(runs)});
    }
    std::sort(sets.begin(), sets.end(),
              [](const ContourSet& a, const ContourSet& b) { return a.runs.front() < b.runs.front(); });
    for (std::size_t i = 0; i < sets.size(); ++i) sets[i].id = static_cast<int>(i);
    runs_by_label_.clear();
    parent_.clear();
    prev_.clear();
    return sets;
  }

  /// Largest number of run records held at once (previous + current row).
  std::size_t peak_run_records() const noexcept { return peak_run_records_; }
  std::size_t max_runs_per_row() const noexcept { return max_runs_per_row_; }
  int rows_consumed() const noexcept { return y_; }

private:
  struct LabeledRun {
    Run run;
    int label;
  };

  static bool edges_match(const Run& above, const Run& here) {
    return std::abs(above.x_left - here.x_left) <= 1 && std::abs(above.x_right - here.x_right) <= 1;
  }

  int new_label() {
    const int label = static_cast<int>(runs_by_label_.size());
    runs_by_label_.emplace_back();
    parent_.push_back(label);
    return label;
  }

  int find(int label) {
    while (parent_[label] != label) {
      parent_[label] = parent_[parent_[label]];
      label = parent_[label];
    }
    return label;
  }

  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (runs_by_label_[a].size() < runs_by_label_[b].size()) std::swap(a, b);
    parent_[b] = a;
    auto& into = runs_by_label_[a];
    auto& from = runs_by_label_[b];
    into.insert(into.end(), from.begin(), from.end());
    from.clear();
    from.shrink_to_fit();
    return a;
  }

  void link_literal() {
    for (const Run& run : scratch_) {
      int label = -1;
      for (const LabeledRun& above : prev_) {
        if (edges_match(above.run, run)) {
          label = above.label;
          break;
        }
      }
      if (label < 0) label = new_label();
      runs_by_label_[label].push_back(run);
      cur_.push_back({run, label});
    }
  }

  void link_robust() {
    std::size_t start = 0;
    for (const Run& run : scratch_) {
      while (start < prev_.size() && prev_[start].run.x_right < run.x_left - 1) ++start;
      int label = -1;
      for (std::size_t k = start; k < prev_.size() && prev_[k].run.x_left <= run.x_right + 1; ++k) {
        label = label < 0 ? find(prev_[k].label) : unite(label, prev_[k].label);
      }
      if (label < 0) label = new_label();
      label = find(label);
      runs_by_label_[label].push_back(run);
      cur_.push_back({run, label});
    }
  }

  int width_;
  ContourMode mode_;
  int y_ = 0;
  std::vector<Run> scratch_;
  std::vector<LabeledRun> prev_;
  std::vector<LabeledRun> cur_;
  std::vector<int> parent_;
  std::vector<std::vector<Run>> runs_by_label_;
  std::size_t peak_run_records_ = 0;
  std::size_t max_runs_per_row_ = 0;
};

struct FollowStats {
  std::size_t peak_run_records = 0;
  std::size_t max_runs_per_row = 0;
  int rows = 0;
};

template <RowSource Source>
std::vector<ContourSet> rdb_follow(Source& rows, ContourMode mode, FollowStats* stats = nullptr) {
  RdbFollower follower(rows.width(), mode);
  while (auto row = rows.next()) follower.push_row(*row);
  if (stats) *stats = {follower.peak_run_records(), follower.max_runs_per_row(), follower.rows_consumed()};
  return follower.finish();
}

inline std::vector<ContourSet> rdb_follow(const BinaryMask& mask, ContourMode mode = ContourMode::Robust) {
  MaskRowReader rows(mask);
  return rdb_follow(rows, mode);
}

/// Label image of the sets: set id at covered pixels, -1 elsewhere.
inline Grid<int> render_labels(const std::vector<ContourSet>& sets, int width, int height) {
  Grid<int> labels(width, height, -1);
  for (const ContourSet& s : sets) {
    for (const Run& r : s.runs) {
      for (int x = r.x_left; x <= r.x_right; ++x) labels(x, r.row) = s.id;
    }
  }
  return labels;
}

namespace detail {

// Clockwise neighbor order in image coordinates (y grows downward),
// starting east.
inline constexpr std::array<int, 8> kDx{1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr std::array<int, 8> kDy{0, 1, 1, 1, 0, -1, -1, -1};

inline int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

inline ContourSet runs_from_border(const std::vector<std::pair<int, int>>& pixels, int id) {
  std::vector<std::pair<int, int>> by_row = pixels;  // (row, x)
  std::sort(by_row.begin(), by_row.end());
  ContourSet set{id, {}};
  for (std::size_t i = 0; i < by_row.size();) {
    const int row = by_row[i].first;
    const int lo = by_row[i].second;
    std::size_t j = i;
    while (j + 1 < by_row.size() && by_row[j + 1].first == row) ++j;
    set.runs.push_back({row, lo, by_row[j].second});
    i = j + 1;
  }
  return set;
}

}  // namespace detail

/// Classical raster-scan border following (Suzuki-Abe topological
/// structural analysis, 8-connectivity). Outer and hole borders are both
/// traced so scanning never restarts inside a known component; each outer
/// border yields one ContourSet whose runs are the row extents of its border
/// pixels.
inline std::vector<ContourSet> border_follow_baseline(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const int pw = w + 2;
  const int ph = h + 2;
  std::vector<int> f(static_cast<std::size_t>(pw) * ph, 0);
  auto at = [&](int x, int y) -> int& { return f[static_cast<std::size_t>(y) * pw + x]; };
  for (int y = 0; y < h; ++y) {
    const auto row = mask.row(y);
    for (int x = 0; x < w; ++x) at(x + 1, y + 1) = row[x] ? 1 : 0;
  }

  std::vector<ContourSet> sets;
  std::vector<std::pair<int, int>> border;
  int nbd = 1;

  for (int y = 1; y <= h; ++y) {
    for (int x = 1; x <= w; ++x) {
      const int v = at(x, y);
      if (v == 0) continue;
      bool outer = false;
      int x2 = 0;
      int y2 = 0;
      if (v == 1 && at(x - 1, y) == 0) {
        outer = true;
        x2 = x - 1;
        y2 = y;
      } else if (v >= 1 && at(x + 1, y) == 0) {
        x2 = x + 1;
        y2 = y;
      } else {
        continue;
      }
      ++nbd;
      border.clear();

      // Clockwise search around the start for the first nonzero neighbor.
      const int d0 = detail::direction_of(x2 - x, y2 - y);
      int x1 = -1;
      int y1 = -1;
      for (int k = 0; k < 8; ++k) {
        const int d = (d0 + k) % 8;
        if (at(x + detail::kDx[d], y + detail::kDy[d]) != 0) {
          x1 = x + detail::kDx[d];
          y1 = y + detail::kDy[d];
          break;
        }
      }
      if (x1 < 0) {
        at(x, y) = -nbd;
        if (outer) sets.push_back(detail::runs_from_border({{y - 1, x - 1}}, static_cast<int>(sets.size())));
        continue;
      }

      x2 = x1;
      y2 = y1;
      int x3 = x;
      int y3 = y;
      while (true) {
        // Counter-clockwise from the element after (x2, y2).
        const int dprev = detail::direction_of(x2 - x3, y2 - y3);
        bool east_zero = false;
        int x4 = -1;
        int y4 = -1;
        for (int k = 1; k <= 8; ++k) {
          const int d = ((dprev - k) % 8 + 8) % 8;
          const int nx = x3 + detail::kDx[d];
          const int ny = y3 + detail::kDy[d];
          if (at(nx, ny) != 0) {
            x4 = nx;
            y4 = ny;
            break;
          }
          if (d == 0) east_zero = true;
        }
        if (east_zero) {
          at(x3, y3) = -nbd;
        } else if (at(x3, y3) == 1) {
          at(x3, y3) = nbd;
        }
        if (outer) border.emplace_back(y3 - 1, x3 - 1);
        if (x4 == x && y4 == y && x3 == x1 && y3 == y1) break;
        x2 = x3;
        y2 = y3;
        x3 = x4;
        y3 = y4;
      }
      if (outer) sets.push_back(detail::runs_from_border(border, static_cast<int>(sets.size())));
    }
  }
  return sets;
}

}  // namespace wsma

#endif  // WSMA_CONTOUR_HPP
