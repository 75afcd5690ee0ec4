#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mesongs {

// Pinhole camera. world_to_camera maps p_cam = rotation * p_world + translation;
// the camera looks down +z with pixel centers at integer coordinates.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 1;
  int height = 1;

  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
};

using CameraSet = std::vector<Camera>;

void validate(const Camera& camera);

// Camera JSON: {"cameras": [{"width", "height", "fx", "fy", "cx", "cy",
// "world_to_camera": 4x4 row-major (nested or flat 16)}]}.
CameraSet load_cameras_json(const std::filesystem::path& path);
void save_cameras_json(const CameraSet& cameras, const std::filesystem::path& path);

// Cameras on a ring around `target`, all looking at it, with a field of view
// of `fov_y_degrees`.
CameraSet orbit_cameras(std::size_t count, int width, int height, const Eigen::Vector3d& target, double radius,
                        double elevation, double fov_y_degrees, double phase = 0.0);

}  // namespace mesongs
