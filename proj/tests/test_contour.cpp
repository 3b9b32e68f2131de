#include <gtest/gtest.h>

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wsma/boxes.hpp"
#include "wsma/contour.hpp"

using namespace wsma;

namespace {

BinaryMask mask_from(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m(x, y) = rows[y][x] == '1';
  return m;
}

std::vector<Run> brute_runs(const BinaryMask& m, int y) {
  std::vector<int> lefts, rights;
  for (int x = 0; x < m.width(); ++x) {
    if (!m(x, y)) continue;
    if (x == 0 || !m(x - 1, y)) lefts.push_back(x);
    if (x == m.width() - 1 || !m(x + 1, y)) rights.push_back(x);
  }
  std::vector<Run> out;
  for (std::size_t i = 0; i < lefts.size(); ++i) out.push_back({y, lefts[i], rights[i]});
  return out;
}

// Row-convex blobs whose edges move by at most one column per row, kept two
// columns apart so no two blobs touch.
BinaryMask drifting_blobs(std::mt19937_64& rng, int w, int h) {
  BinaryMask m(w, h);
  std::uniform_int_distribution<int> coin(-1, 1);
  const int band = 12;
  for (int x0 = 0; x0 + band <= w; x0 += band + 2) {
    std::uniform_int_distribution<int> start(0, h - 2);
    const int top = start(rng);
    const int bottom = std::uniform_int_distribution<int>(top, h - 1)(rng);
    int l = x0 + band / 2 - 1;
    int r = x0 + band / 2 + 1;
    for (int y = top; y <= bottom; ++y) {
      for (int x = l; x <= r; ++x) m(x, y) = 1;
      l = std::clamp(l + coin(rng), x0, x0 + band - 1);
      r = std::clamp(r + coin(rng), l, x0 + band - 1);
    }
  }
  return m;
}

// Produces rows on demand and cannot rewind; counts how often it is asked.
class OneShotRows {
public:
  OneShotRows(const BinaryMask& m) : mask_(m) {}
  int width() const { return mask_.width(); }
  std::optional<std::span<const std::uint8_t>> next() {
    ++calls;
    if (y_ >= mask_.height()) return std::nullopt;
    buffer_.assign(mask_.row(y_).begin(), mask_.row(y_).end());
    ++y_;
    return std::span<const std::uint8_t>(buffer_);
  }
  int calls = 0;

private:
  const BinaryMask& mask_;
  std::vector<std::uint8_t> buffer_;
  int y_ = 0;
};

static_assert(RowSource<OneShotRows>);
static_assert(RowSource<MaskRowReader>);

}  // namespace

TEST(ScanRuns, SingleRows) {
  EXPECT_EQ(scan_runs(mask_from({"0110"}), 0), (std::vector<wsma::Run>{{0, 1, 2}}));
  const auto runs = scan_runs(mask_from({"1010"}), 0);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].length(), 1);
  EXPECT_EQ(runs[1].length(), 1);
  EXPECT_TRUE(scan_runs(mask_from({"0000"}), 0).empty());
}

TEST(ScanRuns, MatchesEdgePixelTest) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> dim(1, 64);
  for (int t = 0; t < 1000; ++t) {
    const BinaryMask m = oracle::random_mask(rng, dim(rng), dim(rng), 0.5);
    for (int y = 0; y < m.height(); ++y) ASSERT_EQ(scan_runs(m, y), brute_runs(m, y));
  }
}

TEST(ScanRuns, RowOutOfRange) {
  try {
    scan_runs(BinaryMask(4, 4), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RowOutOfRange);
  }
}

TEST(RdbFollow, SinglePixel) {
  const auto sets = rdb_follow(mask_from({"1"}));
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].runs, (std::vector<wsma::Run>{{0, 0, 0}}));
}

TEST(RdbFollow, SolidThreeByThree) {
  for (auto mode : {ContourMode::Literal, ContourMode::Robust}) {
    const auto sets = rdb_follow(mask_from({"111", "111", "111"}), mode);
    ASSERT_EQ(sets.size(), 1u);
    EXPECT_EQ(sets[0].runs, (std::vector<wsma::Run>{{0, 0, 2}, {1, 0, 2}, {2, 0, 2}}));
  }
}

TEST(RdbFollow, UShape) {
  const BinaryMask u = mask_from({
      "110011",
      "110011",
      "110011",
      "111111",
  });
  EXPECT_EQ(rdb_follow(u, ContourMode::Robust).size(), 1u);
  // Literal: rows 0-2 hold two sets (columns 0-1 and 4-5). The joining run
  // 0-5 matches neither (right edge moves by 4 and left edge by 4), so it
  // opens a third set.
  const auto literal = rdb_follow(u, ContourMode::Literal);
  ASSERT_EQ(literal.size(), 3u);
  EXPECT_EQ(literal[0].runs.size(), 3u);
  EXPECT_EQ(literal[1].runs.size(), 3u);
  EXPECT_EQ(literal[2].runs, (std::vector<wsma::Run>{{3, 0, 5}}));
}

TEST(RdbFollow, DiagonalNeighboursJoin) {
  EXPECT_EQ(rdb_follow(mask_from({"100", "010", "001"})).size(), 1u);
  EXPECT_EQ(rdb_follow(mask_from({"101", "000", "101"})).size(), 4u);
}

TEST(RdbFollow, EmptyMask) { EXPECT_TRUE(rdb_follow(BinaryMask(7, 5)).empty()); }

TEST(RdbFollow, RobustEqualsFloodFillOnRandomMasks) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> density(0.05, 0.9);
  for (int t = 0; t < 1000; ++t) {
    const BinaryMask m = oracle::random_mask(rng, dim(rng), dim(rng), density(rng));
    ASSERT_EQ(oracle::partition_of(rdb_follow(m, ContourMode::Robust), m.width()), oracle::flood_fill(m));
  }
}

TEST(RdbFollow, SetsAreOrderedAndNumbered) {
  std::mt19937_64 rng(43);
  const BinaryMask m = oracle::random_mask(rng, 50, 40, 0.4);
  const auto sets = rdb_follow(m);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ(sets[i].id, static_cast<int>(i));
    EXPECT_TRUE(std::is_sorted(sets[i].runs.begin(), sets[i].runs.end()));
    if (i > 0) {
      EXPECT_LT(sets[i - 1].runs.front(), sets[i].runs.front());
    }
  }
  EXPECT_EQ(rdb_follow(m), sets);
}

TEST(RdbFollow, LiteralEqualsRobustOnDriftBoundedShapes) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 500; ++t) {
    const BinaryMask m = drifting_blobs(rng, 64, 64);
    ASSERT_EQ(rdb_follow(m, ContourMode::Literal), rdb_follow(m, ContourMode::Robust));
  }
}

TEST(RdbFollow, StreamsEachRowOnceWithinTwoRowBound) {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 100; ++t) {
    const BinaryMask m = oracle::random_mask(rng, 60, 50, 0.5);
    OneShotRows rows(m);
    FollowStats stats;
    const auto sets = rdb_follow(rows, ContourMode::Robust, &stats);
    EXPECT_EQ(rows.calls, m.height() + 1);
    EXPECT_EQ(stats.rows, m.height());
    EXPECT_LE(stats.peak_run_records, 2 * stats.max_runs_per_row);
    EXPECT_EQ(sets, rdb_follow(m));
  }
}

TEST(RdbFollow, WidthMismatchOnPush) {
  RdbFollower f(5, ContourMode::Robust);
  const std::vector<std::uint8_t> row(4, 1);
  try {
    f.push_row(row);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(RenderLabels, InvertsFollowing) {
  const BinaryMask m = mask_from({"1100", "0001", "1001"});
  const auto sets = rdb_follow(m);
  const Grid<int> labels = render_labels(sets, 4, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(labels(x, y) >= 0, m(x, y) != 0);
  EXPECT_EQ(labels(3, 1), labels(3, 2));
  EXPECT_NE(labels(0, 0), labels(0, 2));
}

TEST(BorderFollowBaseline, EmptyAndSolid) {
  EXPECT_TRUE(border_follow_baseline(BinaryMask(6, 6)).empty());
  const BinaryMask sq = mask_from({"00000", "01110", "01110", "01110", "00000"});
  const auto base = border_follow_baseline(sq);
  const auto rdb = rdb_follow(sq);
  ASSERT_EQ(base.size(), 1u);
  EXPECT_EQ(bounding_box(base[0]), bounding_box(rdb[0]));
}

TEST(BorderFollowBaseline, RingAroundIsolatedPixel) {
  const BinaryMask ring = mask_from({"11111", "10001", "10101", "10001", "11111"});
  EXPECT_EQ(border_follow_baseline(ring).size(), 2u);
  EXPECT_EQ(rdb_follow(ring).size(), 2u);
}

TEST(BorderFollowBaseline, CountMatchesRdbOnRandomBlobs) {
  std::mt19937_64 rng(46);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> density(0.05, 0.8);
  for (int t = 0; t < 1000; ++t) {
    const BinaryMask m = oracle::random_mask(rng, dim(rng), dim(rng), density(rng));
    ASSERT_EQ(border_follow_baseline(m).size(), rdb_follow(m).size());
  }
}
