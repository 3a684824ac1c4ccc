#pragma once

#include <array>
#include <optional>

#include "roundtable/model.hpp"
#include "roundtable/rotation.hpp"

namespace roundtable {

// World frame: camera at the origin, +z up, azimuth measured counter-clockwise
// (seen from above) from +x.

struct PanoramaAngles {
  double azimuth_deg = 0.0;    // [-180, 180)
  double elevation_deg = 0.0;  // up positive
};

Vec3 direction_from_angles(double azimuth_deg, double elevation_deg);
PanoramaAngles angles_of(const Vec3& direction);

/// Stitched-panorama pixel -> viewing angles.
PanoramaAngles pixel_to_angles(const Point2& px, const CameraModel& camera);
/// Inverse of pixel_to_angles. With `near_x`, the returned x is the
/// representative (modulo the panorama width) closest to it.
Point2 angles_to_pixel(const PanoramaAngles& angles, const CameraModel& camera,
                       std::optional<double> near_x = std::nullopt);
double panorama_width_px(const CameraModel& camera);

/// Perspective camera aimed along `axis` with no roll. Camera frame:
/// +x to the camera's left, +y up, +z along the optical axis. Rows of
/// `world_to_camera` are those axes in world coordinates.
struct PerspectiveView {
  Mat3 world_to_camera = Mat3::Identity();

  Vec3 to_camera(const Vec3& world) const { return world_to_camera * world; }
  Vec3 to_world(const Vec3& cam) const { return world_to_camera.transpose() * cam; }
};

PerspectiveView view_along(const Vec3& axis);

/// Pinhole projection of a camera-frame point: u = cx - f X / Z,
/// v = cy - f Y / Z (pixel rows grow downward).
Point2 project_pinhole(const Vec3& p_cam, const CameraModel& camera);

/// Re-projects a face's panorama landmarks into the perspective view aimed
/// at its nose landmark.
struct FaceView {
  PerspectiveView view;
  std::array<Point2, kLandmarkCount> pixels{};
};
FaceView face_view(const std::array<Point2, kLandmarkCount>& panorama_px,
                   const CameraModel& camera);

}  // namespace roundtable
