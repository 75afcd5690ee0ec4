#pragma once

#include <Eigen/Core>
#include <array>

namespace mesongs {

// Roll/pitch/yaw angles in radians. R = Rz(psi) * Ry(theta) * Rx(phi), so
// phi, psi lie in (-pi, pi] and theta in [-pi/2, pi/2].
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

using Quaternion = std::array<double, 4>;  // [w, x, y, z]

// Throws ArgumentError unless |q| = 1 within 1e-6. q and -q give the same
// angles. Exactly at gimbal lock (wy - xz = +-1/2) the angles returned are
// whatever the atan2 terms evaluate to; only phi -+ psi is meaningful there.
EulerAngles quat_to_euler(const Quaternion& q);

Eigen::Matrix3d euler_to_rotmat(const EulerAngles& e);

// Unit quaternion with w >= 0 whose matrix equals euler_to_rotmat(e).
Quaternion euler_to_quat(const EulerAngles& e);

}  // namespace mesongs
