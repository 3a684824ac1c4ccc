#include "roundtable/head_pose.hpp"

#include <cmath>
#include <deque>
#include <istream>
#include <map>

#include <fmt/format.h>

#include "roundtable/angles.hpp"
#include "roundtable/bundle_io.hpp"
#include "roundtable/errors.hpp"
#include "roundtable/panorama.hpp"

namespace roundtable {

namespace {

constexpr std::string_view kPoseHeader = "frame_idx,participant,pitch,yaw,roll,rmse,status";
// Face boxes typically span ~1.6x the landmark height (forehead, chin).
constexpr double kFaceBoxToLandmarkHeight = 1.6;

PoseStatus status_from_string(std::string_view s, const std::string& source, int line) {
  if (s == "ok") return PoseStatus::kOk;
  if (s == "unreliable") return PoseStatus::kUnreliable;
  if (s == "degenerate") return PoseStatus::kDegenerate;
  throw SchemaError(source, line, fmt::format("unknown pose status '{}'", s));
}

}  // namespace

std::string_view to_string(PoseStatus status) {
  switch (status) {
    case PoseStatus::kOk:
      return "ok";
    case PoseStatus::kUnreliable:
      return "unreliable";
    case PoseStatus::kDegenerate:
      return "degenerate";
  }
  return "degenerate";
}

HeadPose head_pose_from(const PnpSolution& solution) {
  HeadPose pose;
  const auto e = matrix_to_euler(rotation_vec_to_matrix(solution.rotation_vec));
  pose.pitch_deg = e.pitch;
  pose.yaw_deg = e.yaw;
  pose.roll_deg = e.roll;
  pose.rotation_vec = solution.rotation_vec;
  pose.translation_vec = solution.translation;
  pose.reprojection_rmse_px = solution.rmse_px;
  return pose;
}

PoseRecord estimate_head_pose(const LandmarkFrame& frame, std::size_t seat,
                              const FaceModel3D& model, const CameraModel& camera,
                              const PoseOptions& options) {
  PoseRecord rec;
  rec.frame_idx = frame.frame_idx;
  rec.seat = seat;
  try {
    const FaceView view = face_view(frame.landmarks, camera);
    PnpOptions pnp = options.pnp;
    if (!pnp.initial_depth) {
      const double angle =
          deg_to_rad(frame.face_bbox.h * camera.vertical_fov_deg / camera.hemisphere_height_px);
      if (angle > 0.0) {
        pnp.initial_depth = kFaceBoxToLandmarkHeight * model.landmark_height() / std::tan(angle);
      }
    }
    const PnpSolution sol = solve_pnp(view.pixels, model, camera, pnp);
    rec.pose = head_pose_from(sol);
    const bool ok = sol.converged && std::isfinite(sol.rmse_px) && sol.rmse_px <= options.rmse_gate_px;
    rec.status = ok ? PoseStatus::kOk : PoseStatus::kUnreliable;
  } catch (const DegenerateError&) {
    rec.status = PoseStatus::kDegenerate;
  }
  return rec;
}

std::vector<PoseRecord> estimate_session_poses(const SessionData& data, const FaceModel3D& model,
                                               const PoseOptions& options) {
  std::vector<PoseRecord> out;
  out.reserve(data.frames.size());
  for (const auto& fr : data.frames) {
    out.push_back(estimate_head_pose(fr, data.session.layout.require_index(fr.participant), model,
                                     data.session.camera, options));
  }
  if (options.smoothing_window > 1) out = smooth_poses(std::move(out), options.smoothing_window);
  return out;
}

std::vector<PoseRecord> smooth_poses(std::vector<PoseRecord> records, int window) {
  if (window <= 1) return records;
  struct Track {
    int last_frame = -2;
    std::deque<EulerDeg> history;
  };
  std::map<std::size_t, Track> tracks;
  for (auto& rec : records) {
    auto& tr = tracks[rec.seat];
    if (rec.status != PoseStatus::kOk) {
      tr.history.clear();
      tr.last_frame = -2;
      continue;
    }
    if (rec.frame_idx != tr.last_frame + 1) tr.history.clear();
    tr.last_frame = rec.frame_idx;
    tr.history.push_back({rec.pose.pitch_deg, rec.pose.yaw_deg, rec.pose.roll_deg});
    if (static_cast<int>(tr.history.size()) > window) tr.history.pop_front();
    EulerDeg mean;
    for (const auto& e : tr.history) {
      mean.pitch += e.pitch;
      mean.yaw += e.yaw;
      mean.roll += e.roll;
    }
    const double n = static_cast<double>(tr.history.size());
    rec.pose.pitch_deg = mean.pitch / n;
    rec.pose.yaw_deg = mean.yaw / n;
    rec.pose.roll_deg = mean.roll / n;
    rec.pose.rotation_vec = matrix_to_rotation_vec(
        euler_to_matrix({rec.pose.pitch_deg, rec.pose.yaw_deg, rec.pose.roll_deg}));
  }
  return records;
}

std::string format_pose_dump(const std::vector<PoseRecord>& records, const SeatingLayout& layout) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "{}\n", kPoseHeader);
  for (const auto& r : records) {
    fmt::format_to(std::back_inserter(out), "{},{},{:.9f},{:.9f},{:.9f},{:.6f},{}\n", r.frame_idx,
                   layout.seats.at(r.seat).id, r.pose.pitch_deg, r.pose.yaw_deg, r.pose.roll_deg,
                   r.pose.reprojection_rmse_px, to_string(r.status));
  }
  return fmt::to_string(out);
}

std::vector<PoseRecord> parse_pose_dump(std::istream& in, const SeatingLayout& layout,
                                        const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kPoseHeader) {
    throw SchemaError(source, 1, fmt::format("expected header '{}'", kPoseHeader));
  }
  std::vector<PoseRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = io::split_csv_line(line);
    if (f.size() != 7) throw SchemaError(source, lineno, "expected 7 fields");
    PoseRecord r;
    r.frame_idx = io::parse_int(f[0], source, lineno, "frame_idx");
    auto seat = layout.index_of(f[1]);
    if (!seat) throw SchemaError(source, lineno, fmt::format("unknown participant '{}'", f[1]));
    r.seat = *seat;
    r.pose.pitch_deg = io::parse_double(f[2], source, lineno, "pitch");
    r.pose.yaw_deg = io::parse_double(f[3], source, lineno, "yaw");
    r.pose.roll_deg = io::parse_double(f[4], source, lineno, "roll");
    r.pose.reprojection_rmse_px = io::parse_double(f[5], source, lineno, "rmse");
    r.status = status_from_string(f[6], source, lineno);
    r.pose.rotation_vec = matrix_to_rotation_vec(
        euler_to_matrix({r.pose.pitch_deg, r.pose.yaw_deg, r.pose.roll_deg}));
    out.push_back(r);
  }
  return out;
}

}  // namespace roundtable
