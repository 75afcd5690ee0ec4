#include "mesongs/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mesongs/error.hpp"

namespace mesongs {

EulerAngles quat_to_euler(const Quaternion& q) {
  const auto [w, x, y, z] = q;
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(std::abs(norm - 1.0) <= 1e-6)) throw_argument("quat_to_euler expects a unit quaternion");

  const double s = 2.0 * (w * y - x * z);
  EulerAngles e;
  e.phi = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  // 1 +- s can dip below zero by rounding near gimbal lock.
  e.theta = -0.5 * std::numbers::pi + 2.0 * std::atan2(std::sqrt(std::max(0.0, 1.0 + s)),
                                                       std::sqrt(std::max(0.0, 1.0 - s)));
  e.psi = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  if (1.0 - std::abs(s) < 1e-14) {
    // At the lock only psi -+ phi is defined; pin phi to zero.
    e.phi = 0.0;
    e.psi = std::atan2(-2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z));
  }
  return e;
}

Eigen::Matrix3d euler_to_rotmat(const EulerAngles& e) {
  const double cf = std::cos(e.phi), sf = std::sin(e.phi);
  const double ct = std::cos(e.theta), st = std::sin(e.theta);
  const double cp = std::cos(e.psi), sp = std::sin(e.psi);
  Eigen::Matrix3d r;
  r << ct * cp, -cf * sp + sf * st * cp, sf * sp + cf * st * cp,  //
      ct * sp, cf * cp + sf * st * sp, -sf * cp + cf * st * sp,   //
      -st, sf * ct, cf * ct;
  return r;
}

Quaternion euler_to_quat(const EulerAngles& e) {
  const double cf = std::cos(0.5 * e.phi), sf = std::sin(0.5 * e.phi);
  const double ct = std::cos(0.5 * e.theta), st = std::sin(0.5 * e.theta);
  const double cp = std::cos(0.5 * e.psi), sp = std::sin(0.5 * e.psi);
  Quaternion q = {cf * ct * cp + sf * st * sp, sf * ct * cp - cf * st * sp, cf * st * cp + sf * ct * sp,
                  cf * ct * sp - sf * st * cp};
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  const double sign = q[0] < 0.0 ? -1.0 : 1.0;
  for (double& v : q) v *= sign / norm;
  return q;
}

}  // namespace mesongs
