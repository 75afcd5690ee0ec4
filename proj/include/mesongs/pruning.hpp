#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mesongs/camera.hpp"
#include "mesongs/gaussian_cloud.hpp"

namespace mesongs {

inline constexpr double kDefaultBeta = 0.1;

struct ImportanceScores {
  std::vector<double> view_dependent;    // I_d >= 0
  std::vector<double> view_independent;  // I_i in [0, 1]
  std::vector<double> global;            // I_g = I_d * I_i
  double beta = kDefaultBeta;
};

// Sum over cameras of every Gaussian's accumulated alpha * T, using the
// renderer's culling and termination rules. Cameras are scored in parallel and
// reduced in camera order. Throws ArgumentError for an empty camera set.
std::vector<double> view_dependent_scores(const GaussianCloud& cloud, const CameraSet& cameras);

// Volume reference used to normalize view-independent scores: the 90th
// percentile of the activated volumes, linearly interpolated.
double reference_volume(std::span<const double> volumes);

// (clamp(V / V_ref, 0, 1))^beta with V the product of the activated scales.
std::vector<double> view_independent_scores(const GaussianCloud& cloud, double beta);

ImportanceScores importance_scores(const GaussianCloud& cloud, const CameraSet& cameras, double beta);

// Indices of the floor(tau * N) lowest-scored Gaussians (ties: lower index
// first), in ascending index order. Throws ArgumentError for tau outside [0, 1).
std::vector<std::size_t> pruned_indices(std::span<const double> scores, double tau);

// Drops pruned_indices(scores.global, tau), keeping survivors in order.
GaussianCloud prune(const GaussianCloud& cloud, const ImportanceScores& scores, double tau);

struct CurvePoint {
  double x_percent;
  double y_percent;
};

// x% of the least important Gaussians hold y% of the total score. One point
// per prefix length (N + 1 points) when `samples` is 0, otherwise `samples`
// evenly spaced x values with linear interpolation. Throws
// DegenerateInput when the total score is zero.
std::vector<CurvePoint> quantile_curve(std::span<const double> scores, std::size_t samples = 0);

}  // namespace mesongs
