#include "mesongs/renderer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mesongs/error.hpp"

namespace mesongs {

Eigen::Matrix3d quaternion_to_matrix(std::span<const double, 4> q) {
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Matrix3d covariance_from(std::span<const double, 4> quaternion, const Eigen::Vector3d& scales) {
  const Eigen::Matrix3d m = quaternion_to_matrix(quaternion) * scales.asDiagonal();
  return m * m.transpose();
}

Projection project_gaussian(const Eigen::Vector3d& mean, const Eigen::Matrix3d& covariance, const Camera& camera) {
  Projection out;
  const Eigen::Vector3d p = camera.rotation * mean + camera.translation;
  out.depth = p.z();
  if (!(p.z() > kNearPlane)) return out;

  const double z = p.z();
  Eigen::Matrix<double, 2, 3> jacobian;
  jacobian << camera.fx / z, 0.0, -camera.fx * p.x() / (z * z),  //
      0.0, camera.fy / z, -camera.fy * p.y() / (z * z);
  const Eigen::Matrix<double, 2, 3> jw = jacobian * camera.rotation;
  out.cov = jw * covariance * jw.transpose();
  out.cov(0, 0) += kLowPassFloor;
  out.cov(1, 1) += kLowPassFloor;
  out.mean = Eigen::Vector2d(camera.fx * p.x() / z + camera.cx, camera.fy * p.y() / z + camera.cy);
  out.culled = false;
  return out;
}

Eigen::Vector3d eval_sh(std::span<const double, 3> dc, std::span<const double> rest, const Eigen::Vector3d& view_dir,
                        int degree) {
  constexpr double c0 = 0.28209479177387814;
  constexpr double c1 = 0.4886025119029199;
  constexpr double c2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005, -1.0925484305920792,
                           0.5462742152960396};
  constexpr double c3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658, 0.3731763325901154,
                           -0.4570457994644658, 1.445305721320277, -0.5900435899266435};
  if (degree < 0 || degree > 3) throw_argument("eval_sh supports SH degrees 0..3");
  const std::size_t coeffs = static_cast<std::size_t>((degree + 1) * (degree + 1)) - 1;
  if (rest.size() < 3 * coeffs) throw_argument("eval_sh: sh_rest is shorter than the degree requires");

  const double x = view_dir.x(), y = view_dir.y(), z = view_dir.z();
  const double xx = x * x, yy = y * y, zz = z * z;
  const double xy = x * y, yz = y * z, xz = x * z;

  Eigen::Vector3d color;
  for (int ch = 0; ch < 3; ++ch) {
    const double* sh = rest.data() + ch * coeffs;  // sh[k - 1] is coefficient k
    double v = c0 * dc[ch];
    if (degree > 0) {
      v += -c1 * y * sh[0] + c1 * z * sh[1] - c1 * x * sh[2];
      if (degree > 1) {
        v += c2[0] * xy * sh[3] + c2[1] * yz * sh[4] + c2[2] * (2.0 * zz - xx - yy) * sh[5] + c2[3] * xz * sh[6] +
             c2[4] * (xx - yy) * sh[7];
        if (degree > 2) {
          v += c3[0] * y * (3.0 * xx - yy) * sh[8] + c3[1] * xy * z * sh[9] +
               c3[2] * y * (4.0 * zz - xx - yy) * sh[10] + c3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * sh[11] +
               c3[4] * x * (4.0 * zz - xx - yy) * sh[12] + c3[5] * z * (xx - yy) * sh[13] +
               c3[6] * x * (xx - 3.0 * yy) * sh[14];
        }
      }
    }
    color[ch] = std::clamp(v + 0.5, 0.0, 1.0);
  }
  return color;
}

namespace {

struct Splat {
  std::size_t index;
  double depth;
  Eigen::Vector2d mean;
  Eigen::Matrix2d conic;  // inverse 2D covariance
  double opacity;
  Eigen::Vector3d color;
  int x0, x1, y0, y1;  // inclusive pixel rectangle
};

}  // namespace

RenderOutput render(const GaussianCloud& cloud, const Camera& camera, const Eigen::Vector3d& background,
                    bool collect_contributions) {
  validate(camera);
  const int width = camera.width;
  const int height = camera.height;
  const std::size_t n = cloud.size();
  const std::size_t pixel_count = static_cast<std::size_t>(width) * height;

  RenderOutput out;
  out.image = Image(width, height);
  out.transmittance.assign(pixel_count, 1.0);
  if (collect_contributions) out.contributions.assign(n, 0.0);

  const Eigen::Vector3d eye = camera.center();
  std::vector<Splat> splats;
  splats.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pos = cloud.position(i);
    const Eigen::Vector3d mean(pos[0], pos[1], pos[2]);
    const auto ls = cloud.log_scale(i);
    const Eigen::Vector3d scales(std::exp(ls[0]), std::exp(ls[1]), std::exp(ls[2]));
    const Projection proj = project_gaussian(mean, covariance_from(cloud.rotation(i), scales), camera);
    if (proj.culled) {
      ++out.stats.culled;
      continue;
    }
    const double det = proj.cov.determinant();
    if (!(det > kSingularDeterminant)) {
      ++out.stats.singular;
      continue;
    }
    const double mid = 0.5 * (proj.cov(0, 0) + proj.cov(1, 1));
    const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double radius = 3.0 * std::sqrt(lambda_max);
    Splat s;
    s.x0 = std::max(0, static_cast<int>(std::ceil(proj.mean.x() - radius)));
    s.x1 = std::min(width - 1, static_cast<int>(std::floor(proj.mean.x() + radius)));
    s.y0 = std::max(0, static_cast<int>(std::ceil(proj.mean.y() - radius)));
    s.y1 = std::min(height - 1, static_cast<int>(std::floor(proj.mean.y() + radius)));
    if (s.x0 > s.x1 || s.y0 > s.y1) continue;
    s.index = i;
    s.depth = proj.depth;
    s.mean = proj.mean;
    s.conic = proj.cov.inverse();
    s.opacity = sigmoid(cloud.opacity_logits[i]);
    s.color = eval_sh(cloud.dc(i), cloud.rest(i), (mean - eye).normalized(), cloud.sh_degree);
    splats.push_back(s);
  }
  std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
    return a.depth < b.depth || (a.depth == b.depth && a.index < b.index);
  });

  // Walking splats globally front to back visits every pixel's overlapping
  // Gaussians in depth order, so per-pixel state is enough.
  std::vector<Eigen::Vector3d> accum(pixel_count, Eigen::Vector3d::Zero());
  std::vector<char> done(pixel_count, 0);
  for (const Splat& s : splats) {
    for (int py = s.y0; py <= s.y1; ++py) {
      for (int px = s.x0; px <= s.x1; ++px) {
        const std::size_t p = static_cast<std::size_t>(py) * width + px;
        if (done[p]) continue;
        const Eigen::Vector2d d(px - s.mean.x(), py - s.mean.y());
        const double power = -0.5 * d.dot(s.conic * d);
        const double alpha = std::min(kMaxAlpha, s.opacity * std::exp(power));
        if (alpha < kMinAlpha) continue;
        const double t = out.transmittance[p];
        const double weight = alpha * t;
        accum[p] += weight * s.color;
        if (collect_contributions) out.contributions[s.index] += weight;
        out.transmittance[p] = t * (1.0 - alpha);
        if (out.transmittance[p] < kMinTransmittance) done[p] = 1;
      }
    }
  }

  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const std::size_t p = static_cast<std::size_t>(py) * width + px;
      for (int c = 0; c < 3; ++c) {
        out.image.at(px, py, c) = std::clamp(accum[p][c] + out.transmittance[p] * background[c], 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace mesongs
