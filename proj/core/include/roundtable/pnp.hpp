#pragma once

#include <array>
#include <optional>
#include <span>

#include "roundtable/face_model.hpp"
#include "roundtable/model.hpp"
#include "roundtable/rotation.hpp"

namespace roundtable {

struct PnpOptions {
  int max_iterations = 100;
  /// Converged once a proposed update has norm below this.
  double step_tolerance = 1e-10;
  /// Starting distance along the nose ray, in model units. Estimated from
  /// the landmark spread when absent.
  std::optional<double> initial_depth;
};

struct PnpSolution {
  Vec3 rotation_vec = Vec3::Zero();  // model -> camera
  Vec3 translation = Vec3::Zero();   // camera frame, model units
  double rmse_px = 0.0;
  double initial_rmse_px = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projects the model at pose (R, t) through the pinhole described by
/// project_pinhole().
std::array<Point2, kLandmarkCount> project_model(const FaceModel3D& model,
                                                 const CameraModel& camera, const Mat3& r,
                                                 const Vec3& t);

double reprojection_rmse(std::span<const Point2, kLandmarkCount> pixels,
                         const FaceModel3D& model, const CameraModel& camera, const Mat3& r,
                         const Vec3& t);

/// Levenberg-Marquardt over (rotation, translation) minimizing squared pixel
/// reprojection error. Starts facing the camera at the estimated depth on
/// the nose ray. Every accepted step lowers the cost.
///
/// Throws DegenerateError("degenerate configuration ...") for collinear
/// or coincident landmarks.
PnpSolution solve_pnp(std::span<const Point2, kLandmarkCount> pixels, const FaceModel3D& model,
                      const CameraModel& camera, const PnpOptions& options = {});

}  // namespace roundtable
