#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "mesongs/camera.hpp"
#include "mesongs/gaussian_cloud.hpp"

namespace mesongs {

// Rasterizer constants shared by rendering and importance scoring.
inline constexpr double kNearPlane = 0.01;
inline constexpr double kLowPassFloor = 0.3;
inline constexpr double kMaxAlpha = 0.99;
inline constexpr double kMinAlpha = 1.0 / 255.0;
inline constexpr double kMinTransmittance = 1e-4;
inline constexpr double kSingularDeterminant = 1e-12;

// Row-major H x W x 3 image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0.0) {}

  double& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

struct Projection {
  bool culled = true;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();  // includes the low-pass floor
  double depth = 0.0;
};

Projection project_gaussian(const Eigen::Vector3d& mean, const Eigen::Matrix3d& covariance, const Camera& camera);

// Sigma = R S S^T R^T for a [w, x, y, z] quaternion and activated scales.
Eigen::Matrix3d covariance_from(std::span<const double, 4> quaternion, const Eigen::Vector3d& scales);

Eigen::Matrix3d quaternion_to_matrix(std::span<const double, 4> q);

// Real SH color with the 3D-GS constants, offset by 0.5 and clamped to [0, 1].
// `rest` is channel-major (see GaussianCloud); degrees above 3 are rejected.
Eigen::Vector3d eval_sh(std::span<const double, 3> dc, std::span<const double> rest, const Eigen::Vector3d& view_dir,
                        int degree);

struct RenderStats {
  std::size_t culled = 0;
  std::size_t singular = 0;
};

struct RenderOutput {
  Image image;
  std::vector<double> contributions;  // per Gaussian, sum of alpha * T over pixels
  std::vector<double> transmittance;  // per pixel, T left after blending
  RenderStats stats;
};

RenderOutput render(const GaussianCloud& cloud, const Camera& camera, const Eigen::Vector3d& background,
                    bool collect_contributions);

}  // namespace mesongs
