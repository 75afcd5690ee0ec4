#include "mesongs/camera.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "mesongs/error.hpp"

namespace mesongs {

void validate(const Camera& camera) {
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) throw_argument("camera focal lengths must be positive");
  if (camera.width < 1 || camera.height < 1) throw_argument("camera image size must be at least 1x1");
  const Eigen::Matrix3d gram = camera.rotation * camera.rotation.transpose();
  if (!gram.allFinite() || (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw_argument("camera rotation is not orthonormal");
  }
  if (!camera.translation.allFinite()) throw_argument("camera translation is not finite");
}

CameraSet load_cameras_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::Format, "camera JSON: " + std::string(e.what()));
  }

  CameraSet cameras;
  try {
    const auto& list = doc.at("cameras");
    for (const auto& entry : list) {
      Camera cam;
      cam.width = entry.at("width").get<int>();
      cam.height = entry.at("height").get<int>();
      cam.fx = entry.at("fx").get<double>();
      cam.fy = entry.at("fy").get<double>();
      cam.cx = entry.value("cx", 0.5 * (cam.width - 1));
      cam.cy = entry.value("cy", 0.5 * (cam.height - 1));
      const auto& m = entry.at("world_to_camera");
      std::vector<double> flat;
      if (m.size() == 4 && m[0].is_array()) {
        for (const auto& row : m) {
          if (row.size() != 4) throw_error(ErrorKind::Format, "world_to_camera must be 4x4");
          for (const auto& v : row) flat.push_back(v.get<double>());
        }
      } else {
        for (const auto& v : m) flat.push_back(v.get<double>());
      }
      if (flat.size() != 16) throw_error(ErrorKind::Format, "world_to_camera must have 16 entries");
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cam.rotation(r, c) = flat[4 * r + c];
        cam.translation(r) = flat[4 * r + 3];
      }
      validate(cam);
      cameras.push_back(cam);
    }
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::Format, "camera JSON: " + std::string(e.what()));
  }
  return cameras;
}

void save_cameras_json(const CameraSet& cameras, const std::filesystem::path& path) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& cam : cameras) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < 4; ++c) {
        if (r == 3) {
          row.push_back(c == 3 ? 1.0 : 0.0);
        } else {
          row.push_back(c == 3 ? cam.translation(r) : cam.rotation(r, c));
        }
      }
      m.push_back(row);
    }
    list.push_back({{"width", cam.width},
                    {"height", cam.height},
                    {"fx", cam.fx},
                    {"fy", cam.fy},
                    {"cx", cam.cx},
                    {"cy", cam.cy},
                    {"world_to_camera", m}});
  }
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::Io, "cannot write " + path.string());
  out << nlohmann::json{{"cameras", list}}.dump(2) << "\n";
}

CameraSet orbit_cameras(std::size_t count, int width, int height, const Eigen::Vector3d& target, double radius,
                        double elevation, double fov_y_degrees, double phase) {
  CameraSet cameras;
  const double focal = 0.5 * height / std::tan(0.5 * fov_y_degrees * std::numbers::pi / 180.0);
  for (std::size_t k = 0; k < count; ++k) {
    const double azimuth = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    const Eigen::Vector3d eye =
        target + radius * Eigen::Vector3d(std::cos(elevation) * std::cos(azimuth),
                                          std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
    if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);

    Camera cam;
    cam.width = width;
    cam.height = height;
    cam.fx = cam.fy = focal;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * eye;
    cameras.push_back(cam);
  }
  return cameras;
}

}  // namespace mesongs
