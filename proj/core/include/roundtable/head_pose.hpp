#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "roundtable/face_model.hpp"
#include "roundtable/model.hpp"
#include "roundtable/pnp.hpp"
#include "roundtable/rotation.hpp"

namespace roundtable {

/// Orientation of a face relative to the perspective view aimed at its nose.
/// pitch > 0 lifts the chin, yaw > 0 turns the face toward its own left
/// (counter-clockwise seen from above), roll turns about the optical axis.
/// A face looking straight back at the camera has all three at zero.
struct HeadPose {
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double roll_deg = 0.0;
  Vec3 rotation_vec = Vec3::Zero();
  Vec3 translation_vec = Vec3::Zero();
  double reprojection_rmse_px = 0.0;
};

HeadPose head_pose_from(const PnpSolution& solution);

enum class PoseStatus { kOk, kUnreliable, kDegenerate };
std::string_view to_string(PoseStatus status);

struct PoseRecord {
  int frame_idx = 0;
  std::size_t seat = 0;
  PoseStatus status = PoseStatus::kOk;
  HeadPose pose;
};

struct PoseOptions {
  /// Frames whose reprojection RMSE exceeds this are flagged unreliable.
  double rmse_gate_px = 10.0;
  PnpOptions pnp;
  /// Trailing moving average over this many consecutive frames; <= 1 disables.
  int smoothing_window = 0;
};

/// Full per-frame path: panorama landmarks -> nose-centred perspective view
/// -> PnP -> Euler angles. Never throws for bad geometry; the status says so.
PoseRecord estimate_head_pose(const LandmarkFrame& frame, std::size_t seat,
                              const FaceModel3D& model, const CameraModel& camera,
                              const PoseOptions& options);

/// One record per landmark frame, in input order.
std::vector<PoseRecord> estimate_session_poses(const SessionData& data, const FaceModel3D& model,
                                               const PoseOptions& options);

/// Trailing moving average of pitch/yaw/roll per participant over runs of
/// consecutive reliable frames. Records are otherwise unchanged.
std::vector<PoseRecord> smooth_poses(std::vector<PoseRecord> records, int window);

/// `frame_idx,participant,pitch,yaw,roll,rmse,status`
std::string format_pose_dump(const std::vector<PoseRecord>& records, const SeatingLayout& layout);
std::vector<PoseRecord> parse_pose_dump(std::istream& in, const SeatingLayout& layout,
                                        const std::string& source);

}  // namespace roundtable
