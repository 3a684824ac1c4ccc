#include "roundtable/panorama.hpp"

#include <cmath>

#include "roundtable/angles.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

Vec3 direction_from_angles(double azimuth_deg, double elevation_deg) {
  const double az = deg_to_rad(azimuth_deg);
  const double el = deg_to_rad(elevation_deg);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

PanoramaAngles angles_of(const Vec3& d) {
  return {wrap_deg_180(rad_to_deg(std::atan2(d.y(), d.x()))),
          rad_to_deg(std::atan2(d.z(), std::hypot(d.x(), d.y())))};
}

double panorama_width_px(const CameraModel& camera) { return 2.0 * camera.hemisphere_width_px; }

PanoramaAngles pixel_to_angles(const Point2& px, const CameraModel& camera) {
  const double w = camera.hemisphere_width_px;
  const double h = camera.hemisphere_height_px;
  return {wrap_deg_180(-90.0 + 180.0 * px.x / w),
          camera.vertical_fov_deg / 2.0 - camera.vertical_fov_deg * px.y / h};
}

Point2 angles_to_pixel(const PanoramaAngles& angles, const CameraModel& camera,
                       std::optional<double> near_x) {
  const double w = camera.hemisphere_width_px;
  const double h = camera.hemisphere_height_px;
  const double span = panorama_width_px(camera);
  // Azimuth in [-90, 270) covers the stitched width [0, 2w).
  double x = (wrap_deg_360(angles.azimuth_deg + 90.0)) / 180.0 * w;
  if (near_x) x += span * std::round((*near_x - x) / span);
  const double y = (camera.vertical_fov_deg / 2.0 - angles.elevation_deg) / camera.vertical_fov_deg * h;
  return {x, y};
}

PerspectiveView view_along(const Vec3& axis) {
  const Vec3 z = axis.normalized();
  Vec3 up = Vec3::UnitZ() - Vec3::UnitZ().dot(z) * z;
  if (up.norm() < 1e-12) throw DegenerateError("view axis is vertical");
  up.normalize();
  const Vec3 x = up.cross(z);
  PerspectiveView v;
  v.world_to_camera.row(0) = x.transpose();
  v.world_to_camera.row(1) = up.transpose();
  v.world_to_camera.row(2) = z.transpose();
  return v;
}

Point2 project_pinhole(const Vec3& p, const CameraModel& camera) {
  const double f = camera.focal();
  const Point2 c = camera.principal();
  return {c.x - f * p.x() / p.z(), c.y - f * p.y() / p.z()};
}

FaceView face_view(const std::array<Point2, kLandmarkCount>& panorama_px,
                   const CameraModel& camera) {
  FaceView out;
  const auto nose = pixel_to_angles(panorama_px[0], camera);
  out.view = view_along(direction_from_angles(nose.azimuth_deg, nose.elevation_deg));
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    const auto a = pixel_to_angles(panorama_px[k], camera);
    const Vec3 cam = out.view.to_camera(direction_from_angles(a.azimuth_deg, a.elevation_deg));
    if (cam.z() <= 0.0) throw DegenerateError("landmark lies behind the face view");
    out.pixels[k] = project_pinhole(cam, camera);
  }
  return out;
}

}  // namespace roundtable
