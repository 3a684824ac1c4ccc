#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "roundtable/head_pose.hpp"
#include "roundtable/model.hpp"
#include "roundtable/rotation.hpp"

namespace roundtable {

struct LocationVector {
  Vec3 v = Vec3::Zero();
  double seat_angle_deg = 0.0;
  double elevation_deg = 0.0;
  double radius_m = 0.0;
};

/// v = r (cos a, sin a, tan b). Throws ValidationError unless |b| < 90.
LocationVector location_vector(double seat_angle_deg, double elevation_deg, double radius_m);

/// Point the participant is looking at, relative to the camera. The z
/// component is measured downward (v_f.z > 0 lies below the camera plane).
struct FocusVector {
  Vec3 v_f = Vec3::Zero();
  double horiz_angle_deg = 0.0;  // [-180, 180)
  double elevation_deg = 0.0;    // above the camera's horizontal plane
};

/// lx = r + r cos 2y, ly = r sin 2y, h = |(lx, ly)|, lz = h tan(b - pitch),
/// v_f = (-vx cos 2y + vy sin 2y, -vx sin 2y - vy cos 2y, -vz + lz).
/// Throws DegenerateError when |b - pitch| >= 90.
FocusVector focus_vector(const LocationVector& location, const HeadPose& pose);

enum class GateReference { kFieldBottom, kHorizon };

struct AttentionConfig {
  double reading_angle_deg = 15.0;
  double horizontal_fraction = 0.25;
  GateReference gate_reference = GateReference::kFieldBottom;
};

/// Vertical angle of a focus elevation as seen by the reading gate.
double gate_angle_deg(double elevation_deg, const CameraModel& camera, GateReference reference);

/// Closed-open: true iff angle < threshold.
inline bool reading_gate(double vertical_angle_deg, double threshold_deg = 15.0) {
  return vertical_angle_deg < threshold_deg;
}

/// Neighbours of one observer, named from the observer's chair: C on the
/// right (smallest counter-clockwise offset), B opposite, D on the left.
/// Offsets are counter-clockwise camera azimuth differences in (0, 360).
struct ObserverBands {
  std::size_t observer = 0;
  std::size_t right = 0;
  std::size_t opposite = 0;
  std::size_t left = 0;
  double offset_right = 0.0;
  double offset_opposite = 0.0;
  double offset_left = 0.0;
  double u_r = 0.0;
  double u_l = 0.0;
  /// Region edges as offsets: C below edge_r, D above edge_l, B in between.
  double edge_r = 0.0;
  double edge_l = 0.0;
};

ObserverBands horizontal_thresholds(std::size_t observer, const SeatingLayout& layout,
                                    double fraction = 0.25);
std::vector<ObserverBands> session_bands(const SeatingLayout& layout, double fraction = 0.25);

struct AttentionTarget {
  enum class Kind { kParticipant, kReading, kUnfocused };
  Kind kind = Kind::kUnfocused;
  std::size_t seat = 0;  // meaningful for kParticipant only

  static AttentionTarget participant(std::size_t s) { return {Kind::kParticipant, s}; }
  static AttentionTarget reading() { return {Kind::kReading, 0}; }
  static AttentionTarget unfocused() { return {Kind::kUnfocused, 0}; }
  bool is_participant() const { return kind == Kind::kParticipant; }
  friend bool operator==(const AttentionTarget&, const AttentionTarget&) = default;
};

struct AttentionRecord {
  int frame_idx = 0;
  std::size_t observer = 0;
  AttentionTarget target;
  friend bool operator==(const AttentionRecord&, const AttentionRecord&) = default;
};

/// Horizontal part only: which neighbour the focus azimuth falls on.
/// Exact-edge azimuths resolve to the opposite seat.
std::size_t horizontal_target(const ObserverBands& bands, double focus_azimuth_deg,
                              const SeatingLayout& layout);

AttentionTarget classify_frame(const ObserverBands& bands, const FocusVector& focus,
                               const SeatingLayout& layout, const CameraModel& camera,
                               const AttentionConfig& config = {});

/// Pose -> target, including the Unfocused cases (unreliable pose,
/// |b - pitch| >= 90).
AttentionTarget classify_pose(const PoseRecord& pose, const ObserverBands& bands,
                              const SeatingLayout& layout, const CameraModel& camera,
                              const AttentionConfig& config = {});

/// One record per (frame, observer) on the session clock, sorted by frame
/// then seat. Frames with no pose are Unfocused.
std::vector<AttentionRecord> classify_session(const Session& session,
                                              const std::vector<PoseRecord>& poses,
                                              const AttentionConfig& config = {});

/// `frame_idx,observer,target` with target a participant id, READING or
/// UNFOCUSED.
std::string format_attention_dump(const std::vector<AttentionRecord>& records,
                                  const SeatingLayout& layout);
std::vector<AttentionRecord> parse_attention_dump(std::istream& in, const SeatingLayout& layout,
                                                  const std::string& source);

}  // namespace roundtable
