#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mesongs/camera.hpp"
#include "mesongs/gaussian_cloud.hpp"

namespace gen {

// SplitMix64; small, seedable and independent of <random>'s distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Inclusive range.
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  double normal();
  bool coin() { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Uniform on SO(3) (Shoemake's subgroup method), [w, x, y, z].
std::array<double, 4> unit_quaternion(Rng& rng);

std::vector<double> normal_vector(Rng& rng, std::size_t count, double sigma = 1.0);

// Random Gaussians in [-extent, extent]^3 with log-scales around log(base_scale).
mesongs::GaussianCloud cloud(Rng& rng, std::size_t count, int sh_degree, double extent = 1.0,
                             double base_scale = 0.05);

// Pinhole camera at `eye` looking at `target` (y down in the image).
mesongs::Camera look_at(const std::array<double, 3>& eye, const std::array<double, 3>& target, int width,
                        int height, double fov_y_degrees);

// Camera somewhere on a sphere of the given radius around the origin.
mesongs::Camera orbit_camera(Rng& rng, double radius, int width, int height, double fov_y_degrees);

// `count` distinct Morton keys below 8^depth, ascending. count is capped at 8^depth.
std::vector<std::uint64_t> distinct_keys(Rng& rng, std::size_t count, int depth);

}  // namespace gen
