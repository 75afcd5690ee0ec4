#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mesongs/gaussian_cloud.hpp"

namespace mesongs {

inline constexpr int kMaxOctreeDepth = 21;  // 3 * 21 = 63 Morton bits

// Morton interleave: bit 3b is x, 3b+1 is y, 3b+2 is z for level bit b.
std::uint64_t morton_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z);
std::array<std::uint32_t, 3> morton_decode(std::uint64_t key);

struct VoxelGrid {
  int depth = 1;
  std::array<double, 3> bbox_min{};
  double bbox_size = 1.0;
  std::vector<std::uint64_t> keys;           // strictly increasing, < 8^depth
  std::vector<std::uint64_t> source_counts;  // Gaussians merged into each voxel

  double voxel_size() const { return bbox_size / static_cast<double>(std::uint64_t{1} << depth); }
  std::array<double, 3> center(std::uint64_t key) const;
};

struct Voxelized {
  VoxelGrid grid;
  GaussianCloud merged;  // one row per voxel, Morton order, positions = voxel centers
};

// Gaussians sharing a voxel are averaged channel by channel in pre-activation
// space; quaternions are sign-aligned to the first one in the voxel, averaged
// and re-normalized.
Voxelized voxelize(const GaussianCloud& cloud, int depth);

struct Octree {
  int depth = 1;
  std::array<double, 3> bbox_min{};
  double bbox_size = 1.0;
  std::vector<std::uint8_t> occupancy;  // breadth-first, bit k = child k

  bool operator==(const Octree&) const = default;
};

// One merge of two sibling nodes: positions `left` and `left + 1` in the
// step's input list, carrying the given integer weights.
struct MergePair {
  std::uint64_t left = 0;
  std::uint64_t left_weight = 1;
  std::uint64_t right_weight = 1;

  bool operator==(const MergePair&) const = default;
};

// One axis pass of one level. Nodes that are not part of a pair pass through;
// the output list keeps input order with each pair collapsed into one node.
struct MergeStep {
  std::uint64_t input_count = 0;
  std::vector<MergePair> pairs;

  bool operator==(const MergeStep&) const = default;
};

// The RAHT merge plan: levels from the leaves up, axes x, y, z within each
// level. Steps without any pair are omitted.
struct MergeSchedule {
  std::uint64_t leaf_count = 0;
  std::vector<MergeStep> steps;

  std::uint64_t pair_count() const;
  bool operator==(const MergeSchedule&) const = default;
};

// Plan for unit-weight leaves at the given sorted keys.
MergeSchedule build_merge_schedule(std::span<const std::uint64_t> keys, int depth);

Octree encode_octree(const VoxelGrid& grid);

struct DecodedOctree {
  std::vector<std::uint64_t> keys;
  std::vector<double> centers;  // M x 3
  MergeSchedule schedule;
};

// Throws CorruptStream on a zero occupancy byte, a truncated stream or
// trailing bytes.
DecodedOctree decode_octree(const Octree& tree);

// Section layout: depth u8, bbox_min 3 x f64, bbox_size f64, node count u64,
// occupancy bytes. Little-endian.
std::vector<std::uint8_t> serialize_octree(const Octree& tree);
Octree deserialize_octree(std::span<const std::uint8_t> bytes);

}  // namespace mesongs
