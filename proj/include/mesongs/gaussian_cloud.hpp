#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace mesongs {

// Number of f_rest values per Gaussian for an SH degree: 3 * ((f + 1)^2 - 1).
constexpr std::size_t sh_rest_width(int sh_degree) {
  const std::size_t k = static_cast<std::size_t>(sh_degree + 1);
  return 3 * (k * k - 1);
}

// Columnar store of N Gaussians in pre-activation space, the layout used by
// 3D-GS checkpoints. Rotations are unit quaternions ordered [w, x, y, z].
// sh_rest rows are channel-major: the R coefficients of bands 1.. first, then
// G, then B (same as f_rest_* in the PLY).
struct GaussianCloud {
  std::vector<double> positions;       // N x 3
  std::vector<double> rotations;       // N x 4
  std::vector<double> log_scales;      // N x 3
  std::vector<double> opacity_logits;  // N
  std::vector<double> sh_dc;           // N x 3
  std::vector<double> sh_rest;         // N x D
  int sh_degree = 0;

  GaussianCloud() = default;
  GaussianCloud(std::size_t count, int degree);

  std::size_t size() const { return opacity_logits.size(); }
  bool empty() const { return opacity_logits.empty(); }
  std::size_t rest_width() const { return sh_rest_width(sh_degree); }

  std::span<double, 3> position(std::size_t i) { return std::span<double, 3>(positions.data() + 3 * i, 3); }
  std::span<const double, 3> position(std::size_t i) const {
    return std::span<const double, 3>(positions.data() + 3 * i, 3);
  }
  std::span<double, 4> rotation(std::size_t i) { return std::span<double, 4>(rotations.data() + 4 * i, 4); }
  std::span<const double, 4> rotation(std::size_t i) const {
    return std::span<const double, 4>(rotations.data() + 4 * i, 4);
  }
  std::span<double, 3> log_scale(std::size_t i) { return std::span<double, 3>(log_scales.data() + 3 * i, 3); }
  std::span<const double, 3> log_scale(std::size_t i) const {
    return std::span<const double, 3>(log_scales.data() + 3 * i, 3);
  }
  std::span<double, 3> dc(std::size_t i) { return std::span<double, 3>(sh_dc.data() + 3 * i, 3); }
  std::span<const double, 3> dc(std::size_t i) const { return std::span<const double, 3>(sh_dc.data() + 3 * i, 3); }
  std::span<double> rest(std::size_t i) { return {sh_rest.data() + rest_width() * i, rest_width()}; }
  std::span<const double> rest(std::size_t i) const { return {sh_rest.data() + rest_width() * i, rest_width()}; }

  // Rows in the given order (indices may repeat).
  GaussianCloud select(std::span<const std::size_t> indices) const;

  bool operator==(const GaussianCloud&) const = default;
};

// Throws DataError / ArgumentError when column sizes disagree, values are not
// finite, or a rotation is not unit length within 1e-6.
void validate(const GaussianCloud& cloud);

struct ActivatedAttributes {
  std::vector<double> scales;     // N x 3, exp(log_scale)
  std::vector<double> opacities;  // N, sigmoid(logit)
};

ActivatedAttributes activate(const GaussianCloud& cloud);

double sigmoid(double x);

// Binary little-endian PLY in the 3D-GS property layout.
GaussianCloud load_ply(const std::filesystem::path& path);
void save_ply(const GaussianCloud& cloud, const std::filesystem::path& path);

}  // namespace mesongs
