#pragma once

// Reference implementations for the tests. Nothing here calls into the
// library beyond reading its plain data structs; formulas are written out
// again, often by a different route.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mesongs/camera.hpp"
#include "mesongs/gaussian_cloud.hpp"

namespace oracle {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 multiply(const Mat3& a, const Mat3& b);
double frobenius_distance(const Mat3& a, const Eigen::Matrix3d& b);

// Axis-angle route: angle 2 atan2(|v|, w), then Rodrigues' formula.
Mat3 rodrigues(const std::array<double, 4>& q);

// Rz(psi) Ry(theta) Rx(phi) multiplied out from the three elementary rotations.
Mat3 euler_zyx(double phi, double theta, double psi);

// Hamilton product of the three axis quaternions qz(psi) qy(theta) qx(phi).
std::array<double, 4> quaternion_from_euler(double phi, double theta, double psi);

// Ties to even, without relying on the floating-point environment.
double round_half_even(double x);

struct QuantizerBlock {
  double scale = 0.0;
  double zero_point = 0.0;
  bool degenerate = false;
};

// Block parameters straight from the formulas, with min/max passed through
// float32 the way they are stored.
QuantizerBlock quantizer_block(std::span<const double> block, int bits);
std::uint32_t quantize_value(double c, const QuantizerBlock& p, int bits);
double dequantize_value(std::uint32_t code, const QuantizerBlock& p, float block_min);

// Bit-by-bit interleave with x in the lowest position.
std::uint64_t morton(std::uint32_t x, std::uint32_t y, std::uint32_t z, int depth);

// Breadth-first occupancy bytes from the set of occupied prefixes per level.
std::vector<std::uint8_t> occupancy(std::span<const std::uint64_t> keys, int depth);

struct Raht {
  double dc = 0.0;
  std::vector<double> ac;
};

// Walks node ids directly: one id bit is dropped per axis pass, neighbours
// that agree on the remaining bits merge.
Raht raht(std::span<const std::uint64_t> keys, int depth, std::span<const double> values);

struct Blend {
  std::vector<double> image;          // H x W x 3
  std::vector<double> contributions;  // per Gaussian
  std::vector<double> transmittance;  // per pixel
};

// Per-pixel enumeration: every pixel gathers the Gaussians whose 3-sigma
// rectangle contains it, sorts them and composites. Degree-0 colors only.
Blend brute_force_blend(const mesongs::GaussianCloud& cloud, const mesongs::Camera& camera,
                        const std::array<double, 3>& background);

std::vector<double> brute_force_importance(const mesongs::GaussianCloud& cloud,
                                           const std::vector<mesongs::Camera>& cameras);

// Exhaustive double-precision scan, ties to the lowest index.
std::vector<std::uint32_t> nearest_centroids(std::span<const double> vectors, std::size_t dim,
                                             std::span<const double> centroids);

// Windowed SSIM of two constant images a and b: variances and covariance
// vanish, leaving (2ab + C1) / (a^2 + b^2 + C1).
double ssim_of_constants(double a, double b);

}  // namespace oracle
