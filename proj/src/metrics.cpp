#include "mesongs/metrics.hpp"

#include <array>
#include <cmath>

#include "mesongs/error.hpp"
#include "mesongs/parallel.hpp"

namespace mesongs {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_same_size(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) throw_argument("images have different dimensions");
}

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    w[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable valid-mode filtering of one channel.
std::vector<double> filter_valid(const std::vector<double>& src, int width, int height,
                                 const std::array<double, kWindow>& w) {
  const int ow = width - kWindow + 1;
  const int oh = height - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(height) * ow);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += w[k] * src[static_cast<std::size_t>(y) * width + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += w[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same_size(a, b);
  double sse = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double e = a.pixels[i] - b.pixels[i];
    sse += e * e;
  }
  if (sse == 0.0 || a.pixels.empty()) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.pixels.size());
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
  check_same_size(a, b);
  if (a.width < kWindow || a.height < kWindow) throw_argument("ssim needs images of at least 11x11 pixels");
  const auto w = gaussian_window();
  const std::size_t count = static_cast<std::size_t>(a.width) * a.height;

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> x(count), y(count), xx(count), yy(count), xy(count);
    for (std::size_t p = 0; p < count; ++p) {
      x[p] = a.pixels[3 * p + c];
      y[p] = b.pixels[3 * p + c];
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = filter_valid(x, a.width, a.height, w);
    const auto my = filter_valid(y, a.width, a.height, w);
    const auto sxx = filter_valid(xx, a.width, a.height, w);
    const auto syy = filter_valid(yy, a.width, a.height, w);
    const auto sxy = filter_valid(xy, a.width, a.height, w);
    double sum = 0.0;
    for (std::size_t p = 0; p < mx.size(); ++p) {
      const double vx = sxx[p] - mx[p] * mx[p];
      const double vy = syy[p] - my[p] * my[p];
      const double cov = sxy[p] - mx[p] * my[p];
      sum += ((2.0 * mx[p] * my[p] + kC1) * (2.0 * cov + kC2)) /
             ((mx[p] * mx[p] + my[p] * my[p] + kC1) * (vx + vy + kC2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / 3.0;
}

QualityReport evaluate(const GaussianCloud& reference, const GaussianCloud& test, const CameraSet& cameras,
                       std::size_t max_views, EvalViews* views) {
  if (cameras.empty()) throw_argument("evaluate needs at least one camera");
  const std::size_t count = max_views == 0 ? cameras.size() : std::min(max_views, cameras.size());
  const Eigen::Vector3d background = Eigen::Vector3d::Zero();

  std::vector<Image> ref(count), out(count);
  parallel_for(count, [&](std::size_t v) {
    ref[v] = render(reference, cameras[v], background, false).image;
    out[v] = render(test, cameras[v], background, false).image;
  });

  QualityReport report;
  for (std::size_t v = 0; v < count; ++v) {
    report.view_psnr.push_back(psnr(ref[v], out[v]));
    report.view_ssim.push_back(ssim(ref[v], out[v]));
    report.mean_psnr += report.view_psnr.back();
    report.mean_ssim += report.view_ssim.back();
  }
  report.mean_psnr /= static_cast<double>(count);
  report.mean_ssim /= static_cast<double>(count);
  if (views) {
    views->reference = std::move(ref);
    views->test = std::move(out);
  }
  return report;
}

}  // namespace mesongs
