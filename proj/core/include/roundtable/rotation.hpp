#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace roundtable {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rodrigues formula. The zero vector maps to the identity.
Mat3 rotation_vec_to_matrix(const Vec3& rotation_vec);

/// Inverse of rotation_vec_to_matrix; angle in [0, pi].
Vec3 matrix_to_rotation_vec(const Mat3& r);

/// Intrinsic x-y-z Euler angles in degrees: R = Rx(pitch) * Ry(yaw) * Rz(roll).
struct EulerDeg {
  double pitch = 0.0;
  double yaw = 0.0;
  double roll = 0.0;
};

/// Below this |cos(yaw)| the decomposition is treated as gimbal-locked.
inline constexpr double kGimbalLockCos = 1e-6;

/// yaw is taken on the [-90, 90] branch. At gimbal lock roll is reported
/// as 0 and pitch absorbs the combined rotation.
EulerDeg matrix_to_euler(const Mat3& r);
Mat3 euler_to_matrix(const EulerDeg& e);

/// Skew-symmetric cross-product matrix.
Mat3 hat(const Vec3& v);

}  // namespace roundtable
