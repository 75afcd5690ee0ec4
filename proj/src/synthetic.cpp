#include "mesongs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mesongs {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

GaussianCloud synthetic_cloud(std::size_t count, std::uint64_t seed, int sh_degree) {
  Sampler s(seed);
  GaussianCloud cloud(count, sh_degree);
  const std::size_t per_channel = cloud.rest_width() / 3;
  for (std::size_t i = 0; i < count; ++i) {
    for (double& p : cloud.position(i)) p = s.uniform(-1.0, 1.0);
    double norm = 0.0;
    auto q = cloud.rotation(i);
    for (double& v : q) {
      v = s.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : q) v /= norm;
    const double base = s.uniform(std::log(0.02), std::log(0.06));
    for (double& v : cloud.log_scale(i)) v = base + 0.3 * s.normal();
    cloud.opacity_logits[i] = s.uniform(-1.0, 3.0);
    for (double& v : cloud.dc(i)) v = 0.8 * s.normal();
    auto rest = cloud.rest(i);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t j = 0; j < per_channel; ++j) {
        const int band = static_cast<int>(std::sqrt(static_cast<double>(j + 1)));
        rest[c * per_channel + j] = 0.15 * s.normal() / band;
      }
    }
  }
  return cloud;
}

CameraSet synthetic_cameras(std::size_t count, int width, int height, bool held_out) {
  const double phase = held_out ? std::numbers::pi / static_cast<double>(std::max<std::size_t>(count, 1)) : 0.0;
  return orbit_cameras(count, width, height, Eigen::Vector3d::Zero(), 3.5, 0.35, 50.0, phase);
}

}  // namespace mesongs
