#pragma once

#include <cstdint>

#include "mesongs/camera.hpp"
#include "mesongs/gaussian_cloud.hpp"

namespace mesongs {

// Reproducible random scene: `count` Gaussians inside the cube [-1, 1]^3 with
// small anisotropic scales, random orientations and SH colors whose higher
// bands fall off with degree. Uses its own normal sampler so the scene does not
// depend on the standard library's distributions.
GaussianCloud synthetic_cloud(std::size_t count, std::uint64_t seed, int sh_degree = 3);

// Ring of cameras around the synthetic scene. `held_out` shifts the ring by
// half a step so those views never coincide with the scoring views.
CameraSet synthetic_cameras(std::size_t count, int width = 96, int height = 96, bool held_out = false);

}  // namespace mesongs
