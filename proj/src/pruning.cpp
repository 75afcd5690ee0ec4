#include "mesongs/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mesongs/error.hpp"
#include "mesongs/parallel.hpp"
#include "mesongs/renderer.hpp"

namespace mesongs {

std::vector<double> view_dependent_scores(const GaussianCloud& cloud, const CameraSet& cameras) {
  if (cameras.empty()) throw_argument("view-dependent importance needs at least one camera");
  std::vector<std::vector<double>> partial(cameras.size());
  parallel_for(cameras.size(), [&](std::size_t c) {
    partial[c] = render(cloud, cameras[c], Eigen::Vector3d::Zero(), true).contributions;
  });
  std::vector<double> total(cloud.size(), 0.0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += p[i];
  }
  return total;
}

double reference_volume(std::span<const double> volumes) {
  if (volumes.empty()) throw_argument("reference_volume: no volumes");
  std::vector<double> sorted(volumes.begin(), volumes.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = 0.9 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> view_independent_scores(const GaussianCloud& cloud, double beta) {
  if (cloud.empty()) throw_argument("view-independent importance needs at least one Gaussian");
  if (!(beta > 0.0)) throw_argument("beta must be positive");
  std::vector<double> volumes(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto s = cloud.log_scale(i);
    volumes[i] = std::exp(s[0]) * std::exp(s[1]) * std::exp(s[2]);
  }
  const double ref = reference_volume(volumes);
  std::vector<double> scores(cloud.size(), 1.0);
  if (!(ref > 0.0)) return scores;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    scores[i] = std::pow(std::clamp(volumes[i] / ref, 0.0, 1.0), beta);
  }
  return scores;
}

ImportanceScores importance_scores(const GaussianCloud& cloud, const CameraSet& cameras, double beta) {
  ImportanceScores s;
  s.beta = beta;
  s.view_independent = view_independent_scores(cloud, beta);
  s.view_dependent = view_dependent_scores(cloud, cameras);
  s.global.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) s.global[i] = s.view_dependent[i] * s.view_independent[i];
  return s;
}

std::vector<std::size_t> pruned_indices(std::span<const double> scores, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw_argument("tau must lie in [0, 1)");
  // The relative nudge keeps products such as 0.29 * 100 from flooring to 28.
  const auto count = static_cast<std::size_t>(std::floor(tau * static_cast<double>(scores.size()) * (1.0 + 1e-12)));
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  order.resize(std::min(count, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

GaussianCloud prune(const GaussianCloud& cloud, const ImportanceScores& scores, double tau) {
  if (scores.global.size() != cloud.size()) throw_argument("score count does not match the cloud");
  const auto removed = pruned_indices(scores.global, tau);
  std::vector<std::size_t> keep;
  keep.reserve(cloud.size() - removed.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (r < removed.size() && removed[r] == i) {
      ++r;
      continue;
    }
    keep.push_back(i);
  }
  return cloud.select(keep);
}

std::vector<CurvePoint> quantile_curve(std::span<const double> scores, std::size_t samples) {
  if (scores.empty()) throw_argument("quantile_curve: no scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cumulative(sorted.size() + 1, 0.0);
  for (std::size_t i = 0; i < sorted.size(); ++i) cumulative[i + 1] = cumulative[i] + sorted[i];
  const double total = cumulative.back();
  if (!(total > 0.0)) throw_error(ErrorKind::DegenerateInput, "quantile_curve: total importance is zero");

  const double n = static_cast<double>(sorted.size());
  std::vector<CurvePoint> curve;
  if (samples == 0) {
    curve.reserve(sorted.size() + 1);
    for (std::size_t k = 0; k <= sorted.size(); ++k) {
      curve.push_back({100.0 * static_cast<double>(k) / n, 100.0 * cumulative[k] / total});
    }
  } else {
    const std::size_t m = std::max<std::size_t>(samples, 2);
    for (std::size_t s = 0; s < m; ++s) {
      const double pos = n * static_cast<double>(s) / static_cast<double>(m - 1);
      const std::size_t lo = std::min(static_cast<std::size_t>(std::floor(pos)), sorted.size());
      const std::size_t hi = std::min(lo + 1, sorted.size());
      const double y = cumulative[lo] + (pos - static_cast<double>(lo)) * (cumulative[hi] - cumulative[lo]);
      curve.push_back({100.0 * pos / n, 100.0 * y / total});
    }
  }
  curve.front() = {0.0, 0.0};
  curve.back() = {100.0, 100.0};
  return curve;
}

}  // namespace mesongs
