#include "roundtable/rotation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "roundtable/angles.hpp"

namespace roundtable {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Mat3 rotation_vec_to_matrix(const Vec3& rotation_vec) {
  const double theta = rotation_vec.norm();
  const Mat3 k = hat(rotation_vec);
  if (theta < 1e-8) {
    // Second-order series; exact to double precision at this size.
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const Mat3 kn = k / theta;
  return Mat3::Identity() + std::sin(theta) * kn + (1.0 - std::cos(theta)) * kn * kn;
}

Vec3 matrix_to_rotation_vec(const Mat3& r) {
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double theta = std::atan2(0.5 * w.norm(), (r.trace() - 1.0) / 2.0);
  if (theta < 1e-8) return 0.5 * w;
  if (kPi - theta > 1e-6) return theta / (2.0 * std::sin(theta)) * w;

  // Near a half turn the antisymmetric part vanishes; recover the axis from
  // the symmetric part R = 2 a a^T - I (plus a small correction).
  const Mat3 s = (r + Mat3::Identity()) / 2.0;
  int k = 0;
  s.diagonal().maxCoeff(&k);
  Vec3 axis = s.col(k) / std::sqrt(std::max(s(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(w) < 0.0) axis = -axis;
  return theta * axis;
}

EulerDeg matrix_to_euler(const Mat3& r) {
  // R = Rx(a) Ry(b) Rz(c):
  //   R(0,2) = sin b
  //   R(1,2) = -sin a cos b,  R(2,2) = cos a cos b
  //   R(0,1) = -cos b sin c,  R(0,0) = cos b cos c
  const double b = std::atan2(r(0, 2), std::hypot(r(0, 0), r(0, 1)));
  double a = 0.0;
  double c = 0.0;
  if (std::abs(std::cos(b)) < kGimbalLockCos) {
    a = std::atan2(r(2, 1), r(1, 1));
  } else {
    a = std::atan2(-r(1, 2), r(2, 2));
    c = std::atan2(-r(0, 1), r(0, 0));
  }
  return {rad_to_deg(a), rad_to_deg(b), rad_to_deg(c)};
}

Mat3 euler_to_matrix(const EulerDeg& e) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(deg_to_rad(e.pitch), Vec3::UnitX()) *
          AngleAxisd(deg_to_rad(e.yaw), Vec3::UnitY()) *
          AngleAxisd(deg_to_rad(e.roll), Vec3::UnitZ()))
      .toRotationMatrix();
}

}  // namespace roundtable
