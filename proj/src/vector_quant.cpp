#include "mesongs/vector_quant.hpp"

#include <cblas.h>

#if defined(__x86_64__)
#include <immintrin.h>
#endif

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "mesongs/error.hpp"

namespace mesongs {

namespace {

constexpr std::size_t kRowBlock = 256;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double sum = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double e = a[j] - b[j];
    sum += e * e;
  }
  return sum;
}

// Row scan after the GEMM: h = chalf - dot in place, returning min(h), and the
// indices with h <= threshold in ascending order.
float subtract_min_generic(float* row, const float* chalf, std::size_t k) {
  float best = std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    row[c] = chalf[c] - row[c];
    best = row[c] < best ? row[c] : best;
  }
  return best;
}

std::size_t collect_generic(const float* row, std::size_t k, float threshold, std::uint32_t* out) {
  std::size_t found = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (row[c] <= threshold) out[found++] = static_cast<std::uint32_t>(c);
  }
  return found;
}

#if defined(__x86_64__) && defined(__GNUC__)
__attribute__((target("avx2"))) float subtract_min_avx2(float* row, const float* chalf, std::size_t k) {
  __m256 best = _mm256_set1_ps(std::numeric_limits<float>::infinity());
  std::size_t c = 0;
  for (; c + 8 <= k; c += 8) {
    const __m256 h = _mm256_sub_ps(_mm256_loadu_ps(chalf + c), _mm256_loadu_ps(row + c));
    _mm256_storeu_ps(row + c, h);
    best = _mm256_min_ps(best, h);
  }
  alignas(32) float lanes[8];
  _mm256_store_ps(lanes, best);
  float out = subtract_min_generic(row + c, chalf + c, k - c);
  for (const float v : lanes) out = v < out ? v : out;
  return out;
}

__attribute__((target("avx2"))) std::size_t collect_avx2(const float* row, std::size_t k, float threshold,
                                                         std::uint32_t* out) {
  const __m256 t = _mm256_set1_ps(threshold);
  std::size_t found = 0;
  std::size_t c = 0;
  for (; c + 8 <= k; c += 8) {
    unsigned mask = static_cast<unsigned>(_mm256_movemask_ps(_mm256_cmp_ps(_mm256_loadu_ps(row + c), t, _CMP_LE_OQ)));
    while (mask != 0) {
      out[found++] = static_cast<std::uint32_t>(c + std::countr_zero(mask));
      mask &= mask - 1;
    }
  }
  for (; c < k; ++c) {
    if (row[c] <= threshold) out[found++] = static_cast<std::uint32_t>(c);
  }
  return found;
}
#endif

struct ScanKernels {
  float (*subtract_min)(float*, const float*, std::size_t);
  std::size_t (*collect)(const float*, std::size_t, float, std::uint32_t*);
};

const ScanKernels& scan_kernels() {
  static const ScanKernels kernels = [] {
#if defined(__x86_64__) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx2")) return ScanKernels{subtract_min_avx2, collect_avx2};
#endif
    return ScanKernels{subtract_min_generic, collect_generic};
  }();
  return kernels;
}

// Exact nearest-centroid assignment. A float GEMM ranks all centroids, then
// every centroid whose approximate distance is within the GEMM error bound of
// the best is re-scored in double, so the result matches a plain exhaustive
// scan in double.
void assign_nearest(std::span<const double> vectors, std::size_t dim, std::span<const double> centroids,
                    std::vector<std::uint32_t>& indices, std::vector<double>& distances) {
  const std::size_t n = vectors.size() / dim;
  const std::size_t k = centroids.size() / dim;
  indices.assign(n, 0);
  distances.assign(n, 0.0);
  if (n == 0) return;

  // Center both sides on the centroid mean to keep the norms (and so the
  // cancellation error) small.
  std::vector<double> mean(dim, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += centroids[c * dim + j];
  }
  for (double& m : mean) m /= static_cast<double>(k);

  std::vector<float> cf(k * dim);
  std::vector<float> chalf(k);  // |c|^2 / 2
  double cnorm_max = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const float v = static_cast<float>(centroids[c * dim + j] - mean[j]);
      cf[c * dim + j] = v;
      norm += static_cast<double>(v) * v;
    }
    chalf[c] = static_cast<float>(0.5 * norm);
    cnorm_max = std::max(cnorm_max, norm);
  }

  // Ranking uses h_c = |c|^2 / 2 - x.c in float (distance = |x|^2 + 2 h_c).
  // The slack bounds the float error of the dot products and of h itself.
  const double unit = std::numeric_limits<float>::epsilon();
  const std::size_t rows_per_block = std::min(n, kRowBlock);
  std::vector<float> xf(rows_per_block * dim);
  std::vector<double> xnorm(rows_per_block);
  std::vector<float> dots(rows_per_block * k);
  std::vector<std::uint32_t> candidates(k);
  const ScanKernels& kernels = scan_kernels();

  for (std::size_t begin = 0; begin < n; begin += kRowBlock) {
    const std::size_t rows = std::min(kRowBlock, n - begin);
    for (std::size_t r = 0; r < rows; ++r) {
      double norm = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const float v = static_cast<float>(vectors[(begin + r) * dim + j] - mean[j]);
        xf[r * dim + j] = v;
        norm += static_cast<double>(v) * v;
      }
      xnorm[r] = norm;
    }
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(rows), static_cast<int>(k),
                static_cast<int>(dim), 1.0f, xf.data(), static_cast<int>(dim), cf.data(), static_cast<int>(dim), 0.0f,
                dots.data(), static_cast<int>(k));

    for (std::size_t r = 0; r < rows; ++r) {
      float* row = dots.data() + r * k;
      const float best_h = kernels.subtract_min(row, chalf.data(), k);
      const double slack = 8.0 * static_cast<double>(dim + 8) * unit * (xnorm[r] + cnorm_max) + 1e-300;
      const float threshold = std::nextafter(static_cast<float>(static_cast<double>(best_h) + slack),
                                             std::numeric_limits<float>::infinity());
      const std::size_t found = kernels.collect(row, k, threshold, candidates.data());

      // Candidates come in ascending order, so strict < keeps the lowest index.
      const double* x = vectors.data() + (begin + r) * dim;
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t best_index = 0;
      for (std::size_t f = 0; f < found; ++f) {
        const double d = squared_distance(x, centroids.data() + candidates[f] * dim, dim);
        if (d < best) {
          best = d;
          best_index = candidates[f];
        }
      }
      indices[begin + r] = best_index;
      distances[begin + r] = best;
    }
  }
}

std::vector<std::size_t> seeding_sample(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (count >= n) return order;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    std::swap(order[i], order[std::min(j, n - 1)]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<double> kmeans_plus_plus(std::span<const double> vectors, std::size_t dim, std::size_t k,
                                     std::mt19937_64& rng) {
  const std::size_t n = vectors.size() / dim;
  const std::vector<std::size_t> sample = seeding_sample(n, std::max<std::size_t>(3 * k, k), rng);
  const std::size_t s = sample.size();

  std::vector<float> xs(s * dim);
  std::vector<float> xnorm(s, 0.0f);
  for (std::size_t i = 0; i < s; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = vectors[sample[i] * dim + j];
      xs[i * dim + j] = static_cast<float>(v);
      norm += v * v;
    }
    xnorm[i] = static_cast<float>(norm);
  }

  std::vector<double> centroids;
  centroids.reserve(k * dim);
  std::vector<char> chosen(s, 0);
  std::vector<double> d2(s, std::numeric_limits<double>::infinity());
  std::vector<float> dots(s);

  std::size_t pick = std::min(s - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(s)));
  for (std::size_t c = 0; c < k; ++c) {
    chosen[pick] = 1;
    const float* cx = xs.data() + pick * dim;
    centroids.insert(centroids.end(), vectors.begin() + static_cast<std::ptrdiff_t>(sample[pick] * dim),
                     vectors.begin() + static_cast<std::ptrdiff_t>((sample[pick] + 1) * dim));
    if (c + 1 == k) break;

    cblas_sgemv(CblasRowMajor, CblasNoTrans, static_cast<int>(s), static_cast<int>(dim), 1.0f, xs.data(),
                static_cast<int>(dim), cx, 1, 0.0f, dots.data(), 1);
    double total = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      if (chosen[i]) {
        d2[i] = 0.0;
        continue;
      }
      const double d = std::max(0.0, static_cast<double>(xnorm[i]) + xnorm[pick] - 2.0 * static_cast<double>(dots[i]));
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }

    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = s;
      std::size_t last_positive = s;
      for (std::size_t i = 0; i < s; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == s) pick = last_positive;
    } else {
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
      if (pick == s) pick = 0;  // fewer distinct points than centroids; duplicates are harmless
    }
  }
  return centroids;
}

// Moves the farthest member of the largest cluster into every empty cluster.
void reseed_empty(std::span<const double> vectors, std::size_t dim, std::vector<double>& centroids,
                  std::vector<std::uint32_t>& indices, std::vector<double>& distances,
                  std::vector<std::size_t>& counts) {
  const std::size_t k = counts.size();
  for (std::size_t e = 0; e < k; ++e) {
    if (counts[e] != 0) continue;
    const std::size_t largest =
        static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    if (counts[largest] < 2) return;
    std::size_t far = indices.size();
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] == largest && (far == indices.size() || distances[i] > distances[far])) far = i;
    }
    std::copy_n(vectors.begin() + static_cast<std::ptrdiff_t>(far * dim), dim,
                centroids.begin() + static_cast<std::ptrdiff_t>(e * dim));
    indices[far] = static_cast<std::uint32_t>(e);
    distances[far] = 0.0;
    --counts[largest];
    counts[e] = 1;
  }
}

std::vector<std::size_t> cluster_counts(const std::vector<std::uint32_t>& indices, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (const auto a : indices) ++counts[a];
  return counts;
}

void round_to_float(std::vector<double>& values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

double total(const std::vector<double>& values) { return std::accumulate(values.begin(), values.end(), 0.0); }

}  // namespace

Codebook vq_fit(std::span<const double> vectors, std::size_t dim, const VqOptions& options, VqTrace* trace) {
  if (dim == 0) throw_argument("vq_fit: dimension must be >= 1");
  if (vectors.size() % dim != 0) throw_argument("vq_fit: vector buffer is not a multiple of the dimension");
  const std::size_t n = vectors.size() / dim;
  const std::size_t k = options.codebook_size;
  if (n == 0) throw_argument("vq_fit: no vectors");
  if (k == 0) throw_argument("vq_fit: codebook size must be >= 1");
  if (k > n) {
    throw_argument("vq_fit: codebook size " + std::to_string(k) + " exceeds the " + std::to_string(n) + " vectors");
  }
  if (options.iters < 0) throw_argument("vq_fit: iteration count must be >= 0");

  std::mt19937_64 rng(options.seed);
  Codebook book;
  book.dim = dim;
  book.centroids = kmeans_plus_plus(vectors, dim, k, rng);

  std::vector<std::uint32_t> indices;
  std::vector<double> distances;
  if (n <= options.full_batch_limit) {
    std::vector<double> sums(k * dim);
    for (int it = 0; it < options.iters; ++it) {
      assign_nearest(vectors, dim, book.centroids, indices, distances);
      if (trace) trace->inertia.push_back(total(distances));
      auto counts = cluster_counts(indices, k);
      reseed_empty(vectors, dim, book.centroids, indices, distances, counts);
      std::fill(sums.begin(), sums.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double* x = vectors.data() + i * dim;
        double* s = sums.data() + static_cast<std::size_t>(indices[i]) * dim;
        for (std::size_t j = 0; j < dim; ++j) s[j] += x[j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < dim; ++j) {
          book.centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
        }
      }
    }
  } else {
    const std::size_t batch = std::max<std::size_t>(1, options.batch);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = std::min(i, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1)));
      std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> seen(k, 0);
    std::vector<double> chunk;
    std::vector<std::uint32_t> chunk_indices;
    std::vector<double> chunk_distances;
    for (int it = 0; it < options.iters; ++it) {
      for (std::size_t begin = 0; begin < n; begin += batch) {
        const std::size_t end = std::min(n, begin + batch);
        chunk.resize((end - begin) * dim);
        for (std::size_t r = begin; r < end; ++r) {
          std::copy_n(vectors.begin() + static_cast<std::ptrdiff_t>(order[r] * dim), dim,
                      chunk.begin() + static_cast<std::ptrdiff_t>((r - begin) * dim));
        }
        assign_nearest(chunk, dim, book.centroids, chunk_indices, chunk_distances);
        for (std::size_t r = 0; r < end - begin; ++r) {
          const std::size_t c = chunk_indices[r];
          const double eta = 1.0 / static_cast<double>(++seen[c]);
          double* centroid = book.centroids.data() + c * dim;
          const double* x = chunk.data() + r * dim;
          for (std::size_t j = 0; j < dim; ++j) centroid[j] += eta * (x[j] - centroid[j]);
        }
      }
      if (trace) {
        assign_nearest(vectors, dim, book.centroids, indices, distances);
        trace->inertia.push_back(total(distances));
      }
    }
  }

  if (options.float32_centroids) round_to_float(book.centroids);
  assign_nearest(vectors, dim, book.centroids, indices, distances);
  auto counts = cluster_counts(indices, k);
  if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
    reseed_empty(vectors, dim, book.centroids, indices, distances, counts);
    if (options.float32_centroids) round_to_float(book.centroids);
    assign_nearest(vectors, dim, book.centroids, indices, distances);
  }
  if (trace) trace->inertia.push_back(total(distances));
  book.indices = std::move(indices);
  return book;
}

std::vector<std::uint32_t> vq_encode(std::span<const double> vectors, std::size_t dim,
                                     std::span<const double> centroids) {
  if (dim == 0 || vectors.size() % dim != 0 || centroids.size() % dim != 0 || centroids.empty()) {
    throw_argument("vq_encode: dimensions disagree");
  }
  std::vector<std::uint32_t> indices;
  std::vector<double> distances;
  assign_nearest(vectors, dim, centroids, indices, distances);
  return indices;
}

std::vector<double> vq_decode(std::span<const double> centroids, std::size_t dim,
                              std::span<const std::uint32_t> indices) {
  if (dim == 0 || centroids.size() % dim != 0) throw_argument("vq_decode: dimensions disagree");
  const std::size_t k = centroids.size() / dim;
  std::vector<double> out(indices.size() * dim);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= k) {
      throw_corrupt("vq_decode: index " + std::to_string(indices[i]) + " out of range for a codebook of " +
                    std::to_string(k));
    }
    std::copy_n(centroids.begin() + static_cast<std::ptrdiff_t>(indices[i] * dim), dim,
                out.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  return out;
}

}  // namespace mesongs
