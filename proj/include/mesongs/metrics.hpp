#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mesongs/camera.hpp"
#include "mesongs/gaussian_cloud.hpp"
#include "mesongs/renderer.hpp"

namespace mesongs {

// 10 log10(1 / MSE) over all pixels and channels; +inf for identical images.
double psnr(const Image& a, const Image& b);

// Gaussian-window SSIM (11x11, sigma 1.5, K1 = 0.01, K2 = 0.03, L = 1) over the
// valid region, averaged over channels. Images smaller than the window are
// rejected.
double ssim(const Image& a, const Image& b);

struct QualityReport {
  std::vector<double> view_psnr;
  std::vector<double> view_ssim;
  double mean_psnr = 0.0;  // +inf when every view is identical
  double mean_ssim = 0.0;
  std::uint64_t compressed_bytes = 0;
  std::uint64_t input_bytes = 0;

  double compression_ratio() const {
    return compressed_bytes == 0 ? 0.0 : static_cast<double>(input_bytes) / static_cast<double>(compressed_bytes);
  }
};

struct EvalViews {
  std::vector<Image> reference;
  std::vector<Image> test;
};

// Renders both clouds from the first `max_views` cameras (0 = all) on a black
// background and compares them.
QualityReport evaluate(const GaussianCloud& reference, const GaussianCloud& test, const CameraSet& cameras,
                       std::size_t max_views, EvalViews* views = nullptr);

}  // namespace mesongs
