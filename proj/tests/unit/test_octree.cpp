#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "mesongs/error.hpp"
#include "mesongs/octree.hpp"
#include "oracles.hpp"

using mesongs::GaussianCloud;
using mesongs::VoxelGrid;

namespace {

VoxelGrid grid_of(std::vector<std::uint64_t> keys, int depth) {
  VoxelGrid g;
  g.depth = depth;
  g.bbox_min = {-1.0, -2.0, 0.5};
  g.bbox_size = 3.0;
  g.keys = std::move(keys);
  g.source_counts.assign(g.keys.size(), 1);
  return g;
}

GaussianCloud at_positions(const std::vector<std::array<double, 3>>& pts) {
  GaussianCloud c(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::copy(pts[i].begin(), pts[i].end(), c.positions.begin() + 3 * i);
    c.rotations[4 * i] = 1.0;
  }
  return c;
}

mesongs::ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const mesongs::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mesongs::Error thrown";
  return mesongs::ErrorKind::Argument;
}

}  // namespace

TEST(Morton, MatchesBitLoop) {
  gen::Rng rng(41);
  for (int t = 0; t < 2000; ++t) {
    const auto x = static_cast<std::uint32_t>(rng.next() & 0x1fffff);
    const auto y = static_cast<std::uint32_t>(rng.next() & 0x1fffff);
    const auto z = static_cast<std::uint32_t>(rng.next() & 0x1fffff);
    const std::uint64_t key = mesongs::morton_encode(x, y, z);
    EXPECT_EQ(key, oracle::morton(x, y, z, 21));
    const auto back = mesongs::morton_decode(key);
    EXPECT_EQ(back[0], x);
    EXPECT_EQ(back[1], y);
    EXPECT_EQ(back[2], z);
  }
  EXPECT_EQ(mesongs::morton_encode(1, 0, 0), 1u);
  EXPECT_EQ(mesongs::morton_encode(0, 1, 0), 2u);
  EXPECT_EQ(mesongs::morton_encode(0, 0, 1), 4u);
}

TEST(Voxelize, SinglePointIsChainOfSingleBits) {
  for (int depth : {1, 3, 10}) {
    const auto v = mesongs::voxelize(at_positions({{0.3, -0.2, 5.0}}), depth);
    ASSERT_EQ(v.grid.keys.size(), 1u);
    const auto tree = mesongs::encode_octree(v.grid);
    ASSERT_EQ(tree.occupancy.size(), static_cast<std::size_t>(depth));
    for (auto b : tree.occupancy) EXPECT_EQ(std::popcount(static_cast<unsigned>(b)), 1);
    EXPECT_GT(v.grid.bbox_size, 0.0);
  }
}

TEST(Voxelize, SameVoxelAveragesAttributes) {
  GaussianCloud c = at_positions({{0.0, 0.0, 0.0}, {1e-6, 0.0, 0.0}, {1.0, 1.0, 1.0}});
  c.opacity_logits = {0.0, 2.0, 5.0};
  c.log_scales[0] = -1.0;
  c.log_scales[3] = -3.0;
  const auto v = mesongs::voxelize(c, 4);
  ASSERT_EQ(v.grid.keys.size(), 2u);
  EXPECT_EQ(v.grid.source_counts, (std::vector<std::uint64_t>{2, 1}));
  EXPECT_DOUBLE_EQ(v.merged.opacity_logits[0], 1.0);
  EXPECT_DOUBLE_EQ(v.merged.log_scales[0], -2.0);
  EXPECT_DOUBLE_EQ(v.merged.opacity_logits[1], 5.0);
}

TEST(Voxelize, OppositeSignQuaternionsDoNotCancel) {
  GaussianCloud c = at_positions({{0.0, 0.0, 0.0}, {1e-6, 0.0, 0.0}, {1.0, 1.0, 1.0}});
  const double h = std::sqrt(0.5);
  c.rotations = {h, h, 0, 0, -h, -h, 0, 0, 1, 0, 0, 0};
  const auto v = mesongs::voxelize(c, 4);
  EXPECT_NEAR(v.merged.rotations[0], h, 1e-15);
  EXPECT_NEAR(v.merged.rotations[1], h, 1e-15);
}

TEST(Voxelize, CornersFillTheRoot) {
  std::vector<std::array<double, 3>> pts;
  for (int k = 0; k < 8; ++k) pts.push_back({k & 1 ? 1.0 : -1.0, k & 2 ? 1.0 : -1.0, k & 4 ? 1.0 : -1.0});
  const auto v = mesongs::voxelize(at_positions(pts), 1);
  const auto tree = mesongs::encode_octree(v.grid);
  EXPECT_EQ(tree.occupancy, std::vector<std::uint8_t>{255});
}

TEST(Voxelize, DepthOutOfRangeIsArgumentError) {
  const GaussianCloud c = at_positions({{0, 0, 0}});
  EXPECT_EQ(kind_of([&] { mesongs::voxelize(c, 0); }), mesongs::ErrorKind::Argument);
  EXPECT_EQ(kind_of([&] { mesongs::voxelize(c, 22); }), mesongs::ErrorKind::Argument);
}

TEST(Voxelize, GridInvariantsAndPositionBound) {
  gen::Rng rng(42);
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 500));
    const int depth = static_cast<int>(rng.integer(1, 12));
    GaussianCloud c = gen::cloud(rng, n, 1, rng.uniform(0.01, 50.0));
    const auto v = mesongs::voxelize(c, depth);
    const auto& g = v.grid;
    EXPECT_TRUE(std::is_sorted(g.keys.begin(), g.keys.end()));
    EXPECT_EQ(std::adjacent_find(g.keys.begin(), g.keys.end()), g.keys.end());
    EXPECT_LT(g.keys.back(), std::uint64_t{1} << (3 * depth));
    EXPECT_EQ(std::accumulate(g.source_counts.begin(), g.source_counts.end(), std::uint64_t{0}), n);
    EXPECT_EQ(v.merged.size(), g.keys.size());

    const double vs = g.voxel_size();
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t idx[3];
      for (int a = 0; a < 3; ++a) {
        idx[a] = static_cast<std::uint32_t>(std::floor((c.positions[3 * i + a] - g.bbox_min[a]) / vs));
      }
      const std::uint64_t key = oracle::morton(idx[0], idx[1], idx[2], depth);
      const auto it = std::lower_bound(g.keys.begin(), g.keys.end(), key);
      ASSERT_TRUE(it != g.keys.end() && *it == key);
      const std::size_t row = static_cast<std::size_t>(it - g.keys.begin());
      for (int a = 0; a < 3; ++a) {
        EXPECT_LE(std::abs(v.merged.positions[3 * row + a] - c.positions[3 * i + a]), 0.5 * vs * (1 + 1e-9));
      }
    }
  }
}

TEST(Octree, SingleLeafDepthTwoIsTwoBytes) {
  const auto tree = mesongs::encode_octree(grid_of({37}, 2));
  EXPECT_EQ(tree.occupancy.size(), 2u);
  const auto decoded = mesongs::decode_octree(tree);
  EXPECT_EQ(decoded.keys, std::vector<std::uint64_t>{37});
  EXPECT_TRUE(decoded.schedule.steps.empty());
  EXPECT_EQ(decoded.schedule.leaf_count, 1u);
}

TEST(Octree, FullDepthOneIsOneByte) {
  const auto tree = mesongs::encode_octree(grid_of({0, 1, 2, 3, 4, 5, 6, 7}, 1));
  EXPECT_EQ(tree.occupancy, std::vector<std::uint8_t>{255});
}

TEST(Octree, FullRootCentersAreQuarterOffsets) {
  VoxelGrid g = grid_of({0, 1, 2, 3, 4, 5, 6, 7}, 1);
  const auto decoded = mesongs::decode_octree(mesongs::encode_octree(g));
  ASSERT_EQ(decoded.centers.size(), 24u);
  const double mid[3] = {g.bbox_min[0] + 1.5, g.bbox_min[1] + 1.5, g.bbox_min[2] + 1.5};
  for (std::uint64_t k = 0; k < 8; ++k) {
    for (int a = 0; a < 3; ++a) {
      const double sign = (k >> a) & 1 ? 1.0 : -1.0;
      EXPECT_DOUBLE_EQ(decoded.centers[3 * k + a], mid[a] + sign * 0.25 * g.bbox_size);
    }
  }
}

TEST(Octree, OccupancyMatchesOracleAndRoundTrips) {
  gen::Rng rng(43);
  for (int t = 0; t < 300; ++t) {
    const int depth = static_cast<int>(rng.integer(1, 9));
    const auto keys = gen::distinct_keys(rng, static_cast<std::size_t>(rng.integer(1, 1000)), depth);
    const VoxelGrid g = grid_of(keys, depth);
    const auto tree = mesongs::encode_octree(g);
    EXPECT_EQ(tree.occupancy, oracle::occupancy(keys, depth));
    for (auto b : tree.occupancy) EXPECT_NE(b, 0);

    const auto bytes = mesongs::serialize_octree(tree);
    const auto back = mesongs::deserialize_octree(bytes);
    EXPECT_EQ(back, tree);
    EXPECT_EQ(mesongs::serialize_octree(back), bytes);

    const auto decoded = mesongs::decode_octree(back);
    EXPECT_EQ(decoded.keys, keys);
    EXPECT_EQ(decoded.schedule, mesongs::build_merge_schedule(keys, depth));
    EXPECT_EQ(decoded.schedule.pair_count(), keys.size() - 1);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto c = g.center(keys[i]);
      for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(decoded.centers[3 * i + a], c[a]);
    }
  }
}

TEST(Octree, RandomThousandKeysAtDepthEight) {
  gen::Rng rng(44);
  const auto keys = gen::distinct_keys(rng, 1000, 8);
  EXPECT_EQ(mesongs::decode_octree(mesongs::encode_octree(grid_of(keys, 8))).keys, keys);
}

TEST(Octree, IdenticalInputGivesIdenticalStream) {
  gen::Rng a(45), b(45);
  const auto ca = gen::cloud(a, 300, 0), cb = gen::cloud(b, 300, 0);
  const auto sa = mesongs::serialize_octree(mesongs::encode_octree(mesongs::voxelize(ca, 7).grid));
  const auto sb = mesongs::serialize_octree(mesongs::encode_octree(mesongs::voxelize(cb, 7).grid));
  EXPECT_EQ(sa, sb);
}

TEST(Octree, CorruptStreamsAreRejected) {
  gen::Rng rng(46);
  const auto keys = gen::distinct_keys(rng, 50, 4);
  const auto tree = mesongs::encode_octree(grid_of(keys, 4));

  auto zero = tree;
  zero.occupancy[zero.occupancy.size() / 2] = 0;
  EXPECT_EQ(kind_of([&] { mesongs::decode_octree(zero); }), mesongs::ErrorKind::CorruptStream);

  auto truncated = tree;
  truncated.occupancy.pop_back();
  EXPECT_EQ(kind_of([&] { mesongs::decode_octree(truncated); }), mesongs::ErrorKind::CorruptStream);

  auto trailing = tree;
  trailing.occupancy.push_back(1);
  EXPECT_EQ(kind_of([&] { mesongs::decode_octree(trailing); }), mesongs::ErrorKind::CorruptStream);

  auto bytes = mesongs::serialize_octree(tree);
  bytes.resize(bytes.size() - 3);
  EXPECT_EQ(kind_of([&] { mesongs::deserialize_octree(bytes); }), mesongs::ErrorKind::CorruptStream);
}

TEST(MergeSchedule, StepsFollowXYZPerLevel) {
  // Leaves 0 and 1 differ in x, 0 and 2 in y: x merges first, then y.
  const std::vector<std::uint64_t> keys = {0, 1, 2};
  const auto s = mesongs::build_merge_schedule(keys, 1);
  ASSERT_EQ(s.steps.size(), 2u);
  EXPECT_EQ(s.steps[0].input_count, 3u);
  ASSERT_EQ(s.steps[0].pairs.size(), 1u);
  EXPECT_EQ(s.steps[0].pairs[0], (mesongs::MergePair{0, 1, 1}));
  ASSERT_EQ(s.steps[1].pairs.size(), 1u);
  EXPECT_EQ(s.steps[1].pairs[0], (mesongs::MergePair{0, 2, 1}));
}
