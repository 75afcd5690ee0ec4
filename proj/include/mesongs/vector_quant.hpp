#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mesongs {

struct Codebook {
  std::size_t dim = 0;
  std::vector<double> centroids;       // K x dim
  std::vector<std::uint32_t> indices;  // one per fitted vector

  std::size_t size() const { return dim == 0 ? 0 : centroids.size() / dim; }
};

struct VqOptions {
  std::size_t codebook_size = 4096;
  int iters = 10;
  std::size_t batch = 65536;
  std::uint64_t seed = 0;
  // Inputs up to this many vectors run full-batch Lloyd; larger ones run
  // mini-batch updates.
  std::size_t full_batch_limit = 100000;
  // Round the final centroids to float32 before the last assignment, so the
  // returned indices are exact for a float32-stored codebook.
  bool float32_centroids = false;
};

struct VqTrace {
  // Within-cluster sum of squares after every assignment pass, final pass last.
  std::vector<double> inertia;
};

// k-means++ seeding (on a deterministic subsample of at most 3K vectors)
// followed by `iters` refinement passes. Empty clusters are reseeded with the
// point farthest from its centroid in the largest cluster. Deterministic for a
// given seed. Throws ArgumentError when K > N, K == 0 or dim == 0.
Codebook vq_fit(std::span<const double> vectors, std::size_t dim, const VqOptions& options,
                VqTrace* trace = nullptr);

// Nearest centroid by Euclidean distance, ties to the lowest index. The result
// equals an exhaustive double-precision scan.
std::vector<std::uint32_t> vq_encode(std::span<const double> vectors, std::size_t dim,
                                     std::span<const double> centroids);

// Throws CorruptStream for an index >= K.
std::vector<double> vq_decode(std::span<const double> centroids, std::size_t dim,
                              std::span<const std::uint32_t> indices);

}  // namespace mesongs
