#include "mesongs/octree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mesongs/byte_io.hpp"
#include "mesongs/error.hpp"

namespace mesongs {

namespace {

// Spreads the low 21 bits of v so that bit i lands on bit 3i.
std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0x1fffff;
  v = (v | (v << 32)) & 0x1f00000000ffffULL;
  v = (v | (v << 16)) & 0x1f0000ff0000ffULL;
  v = (v | (v << 8)) & 0x100f00f00f00f00fULL;
  v = (v | (v << 4)) & 0x10c30c30c30c30c3ULL;
  v = (v | (v << 2)) & 0x1249249249249249ULL;
  return v;
}

std::uint32_t compact_bits(std::uint64_t v) {
  v &= 0x1249249249249249ULL;
  v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3ULL;
  v = (v ^ (v >> 4)) & 0x100f00f00f00f00fULL;
  v = (v ^ (v >> 8)) & 0x1f0000ff0000ffULL;
  v = (v ^ (v >> 16)) & 0x1f00000000ffffULL;
  v = (v ^ (v >> 32)) & 0x1fffffULL;
  return static_cast<std::uint32_t>(v);
}

void check_depth(int depth) {
  if (depth < 1 || depth > kMaxOctreeDepth) {
    throw_argument("octree depth must be in [1, " + std::to_string(kMaxOctreeDepth) + "], got " +
                   std::to_string(depth));
  }
}

}  // namespace

std::uint64_t morton_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
  return spread_bits(x) | (spread_bits(y) << 1) | (spread_bits(z) << 2);
}

std::array<std::uint32_t, 3> morton_decode(std::uint64_t key) {
  return {compact_bits(key), compact_bits(key >> 1), compact_bits(key >> 2)};
}

std::array<double, 3> VoxelGrid::center(std::uint64_t key) const {
  const auto idx = morton_decode(key);
  const double vs = voxel_size();
  return {bbox_min[0] + (idx[0] + 0.5) * vs, bbox_min[1] + (idx[1] + 0.5) * vs, bbox_min[2] + (idx[2] + 0.5) * vs};
}

Voxelized voxelize(const GaussianCloud& cloud, int depth) {
  check_depth(depth);
  const std::size_t n = cloud.size();
  if (n == 0) throw_argument("voxelize needs at least one Gaussian");

  std::array<double, 3> lo{}, hi{};
  for (int a = 0; a < 3; ++a) {
    lo[a] = hi[a] = cloud.positions[a];
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], cloud.positions[3 * i + a]);
      hi[a] = std::max(hi[a], cloud.positions[3 * i + a]);
    }
  }
  double extent = 0.0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, hi[a] - lo[a]);

  Voxelized out;
  VoxelGrid& grid = out.grid;
  grid.depth = depth;
  grid.bbox_size = extent > 0.0 ? extent * (1.0 + 1e-9) : 1.0;
  for (int a = 0; a < 3; ++a) grid.bbox_min[a] = 0.5 * (lo[a] + hi[a]) - 0.5 * grid.bbox_size;

  const double vs = grid.voxel_size();
  const std::int64_t max_index = (std::int64_t{1} << depth) - 1;
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::uint32_t, 3> idx{};
    for (int a = 0; a < 3; ++a) {
      const double f = std::floor((cloud.positions[3 * i + a] - grid.bbox_min[a]) / vs);
      idx[a] = static_cast<std::uint32_t>(std::clamp<std::int64_t>(static_cast<std::int64_t>(f), 0, max_index));
    }
    keys[i] = morton_encode(idx[0], idx[1], idx[2]);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::size_t voxels = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || keys[order[k]] != keys[order[k - 1]]) ++voxels;
  }
  GaussianCloud& merged = out.merged;
  merged = GaussianCloud(voxels, cloud.sh_degree);
  grid.keys.reserve(voxels);
  grid.source_counts.reserve(voxels);
  const std::size_t width = cloud.rest_width();

  std::size_t begin = 0;
  std::size_t row = 0;
  while (begin < n) {
    std::size_t end = begin + 1;
    const std::uint64_t key = keys[order[begin]];
    while (end < n && keys[order[end]] == key) ++end;
    const double count = static_cast<double>(end - begin);

    const std::size_t first = order[begin];
    std::array<double, 4> q{};
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = order[k];
      double dot = 0.0;
      for (int c = 0; c < 4; ++c) dot += cloud.rotations[4 * i + c] * cloud.rotations[4 * first + c];
      const double sign = dot < 0.0 ? -1.0 : 1.0;
      for (int c = 0; c < 4; ++c) q[c] += sign * cloud.rotations[4 * i + c];
      for (int c = 0; c < 3; ++c) {
        merged.log_scales[3 * row + c] += cloud.log_scales[3 * i + c];
        merged.sh_dc[3 * row + c] += cloud.sh_dc[3 * i + c];
      }
      merged.opacity_logits[row] += cloud.opacity_logits[i];
      for (std::size_t c = 0; c < width; ++c) merged.sh_rest[width * row + c] += cloud.sh_rest[width * i + c];
    }
    for (int c = 0; c < 3; ++c) {
      merged.log_scales[3 * row + c] /= count;
      merged.sh_dc[3 * row + c] /= count;
    }
    merged.opacity_logits[row] /= count;
    for (std::size_t c = 0; c < width; ++c) merged.sh_rest[width * row + c] /= count;

    const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (int c = 0; c < 4; ++c) {
      merged.rotations[4 * row + c] = norm > 1e-12 ? q[c] / norm : cloud.rotations[4 * first + c];
    }
    const auto center = grid.center(key);
    std::copy(center.begin(), center.end(), merged.positions.begin() + 3 * row);

    grid.keys.push_back(key);
    grid.source_counts.push_back(end - begin);
    ++row;
    begin = end;
  }
  return out;
}

std::uint64_t MergeSchedule::pair_count() const {
  std::uint64_t total = 0;
  for (const auto& step : steps) total += step.pairs.size();
  return total;
}

MergeSchedule build_merge_schedule(std::span<const std::uint64_t> keys, int depth) {
  check_depth(depth);
  MergeSchedule schedule;
  schedule.leaf_count = keys.size();
  std::vector<std::uint64_t> current(keys.begin(), keys.end());
  std::vector<std::uint64_t> weights(keys.size(), 1);
  std::vector<std::uint64_t> next_keys, next_weights;

  for (int shift = 0; shift < 3 * depth; ++shift) {
    MergeStep step;
    step.input_count = current.size();
    next_keys.clear();
    next_weights.clear();
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (i + 1 < current.size() && (current[i] >> 1) == (current[i + 1] >> 1)) {
        step.pairs.push_back({i, weights[i], weights[i + 1]});
        next_keys.push_back(current[i] >> 1);
        next_weights.push_back(weights[i] + weights[i + 1]);
        ++i;
      } else {
        next_keys.push_back(current[i] >> 1);
        next_weights.push_back(weights[i]);
      }
    }
    if (!step.pairs.empty()) schedule.steps.push_back(std::move(step));
    current.swap(next_keys);
    weights.swap(next_weights);
  }
  return schedule;
}

Octree encode_octree(const VoxelGrid& grid) {
  check_depth(grid.depth);
  Octree tree;
  tree.depth = grid.depth;
  tree.bbox_min = grid.bbox_min;
  tree.bbox_size = grid.bbox_size;
  if (grid.keys.empty()) return tree;

  // Level l nodes are the distinct key prefixes key >> 3(d - l); keys are
  // sorted so each level's prefixes come out sorted too (breadth-first order).
  for (int level = 0; level < grid.depth; ++level) {
    const int child_shift = 3 * (grid.depth - level - 1);
    std::uint64_t node = grid.keys.front() >> (child_shift + 3);
    std::uint8_t byte = 0;
    for (const std::uint64_t key : grid.keys) {
      const std::uint64_t prefix = key >> (child_shift + 3);
      if (prefix != node) {
        tree.occupancy.push_back(byte);
        node = prefix;
        byte = 0;
      }
      byte |= static_cast<std::uint8_t>(1u << ((key >> child_shift) & 7u));
    }
    tree.occupancy.push_back(byte);
  }
  return tree;
}

DecodedOctree decode_octree(const Octree& tree) {
  if (tree.depth < 1 || tree.depth > kMaxOctreeDepth) throw_corrupt("octree depth out of range");
  DecodedOctree out;
  std::vector<std::uint64_t> level_nodes;
  if (!tree.occupancy.empty()) level_nodes.push_back(0);
  std::size_t pos = 0;
  std::vector<std::uint64_t> children;
  for (int level = 0; level < tree.depth && !level_nodes.empty(); ++level) {
    children.clear();
    for (const std::uint64_t node : level_nodes) {
      if (pos >= tree.occupancy.size()) throw_corrupt("octree occupancy stream is truncated");
      const std::uint8_t byte = tree.occupancy[pos++];
      if (byte == 0) throw_corrupt("octree node with empty occupancy byte");
      for (unsigned k = 0; k < 8; ++k) {
        if (byte & (1u << k)) children.push_back((node << 3) | k);
      }
    }
    level_nodes.swap(children);
  }
  if (pos != tree.occupancy.size()) throw_corrupt("octree occupancy stream has trailing bytes");
  out.keys = std::move(level_nodes);

  VoxelGrid grid;
  grid.depth = tree.depth;
  grid.bbox_min = tree.bbox_min;
  grid.bbox_size = tree.bbox_size;
  out.centers.reserve(3 * out.keys.size());
  for (const std::uint64_t key : out.keys) {
    const auto c = grid.center(key);
    out.centers.insert(out.centers.end(), c.begin(), c.end());
  }
  out.schedule = build_merge_schedule(out.keys, tree.depth);
  return out;
}

std::vector<std::uint8_t> serialize_octree(const Octree& tree) {
  ByteWriter w;
  w.put(static_cast<std::uint8_t>(tree.depth));
  for (const double v : tree.bbox_min) w.put(v);
  w.put(tree.bbox_size);
  w.put(static_cast<std::uint64_t>(tree.occupancy.size()));
  w.put_bytes(tree.occupancy);
  return w.take();
}

Octree deserialize_octree(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "octree section");
  Octree tree;
  tree.depth = r.get<std::uint8_t>();
  for (double& v : tree.bbox_min) v = r.get<double>();
  tree.bbox_size = r.get<double>();
  const auto count = r.get<std::uint64_t>();
  if (count != r.remaining()) throw_corrupt("octree node count does not match the section length");
  const auto occ = r.get_bytes(count);
  tree.occupancy.assign(occ.begin(), occ.end());
  if (tree.depth < 1 || tree.depth > kMaxOctreeDepth) throw_corrupt("octree depth out of range");
  if (!(tree.bbox_size > 0.0) || !std::isfinite(tree.bbox_size)) throw_corrupt("octree bbox size is invalid");
  return tree;
}

}  // namespace mesongs
