#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace roundtable {

inline constexpr std::size_t kParticipantsPerSession = 4;
inline constexpr std::size_t kLandmarkCount = 6;
/// Upstream face-mesh indices of the tracked landmarks, in storage order.
inline constexpr std::array<int, kLandmarkCount> kLandmarkIndices{1, 9, 57, 130, 287, 359};
/// Upper bound on a session length (10 minute activity limit).
inline constexpr double kMaxSessionDurationS = 600.0;

enum class Role { kBackend, kFrontend, kUiUx, kDataPersistence };
enum class Condition { kNoCoordination, kPlanningPoker };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);
/// "A" / "B".
std::string_view to_string(Condition condition);
Condition condition_from_string(std::string_view text);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool contains(const Point2& p) const;
  bool contains(const Rect& r) const;
};

/// Two 180-degree hemispheres stitched side by side into one panorama of
/// width 2 * hemisphere_width_px. Pixel x maps linearly onto azimuth
/// (hemisphere 0 -> [-90, 90), hemisphere 1 -> [90, 270)), pixel y linearly
/// onto elevation, top row = +vertical_fov / 2.
///
/// focal_length_px and principal_point describe the per-face perspective
/// view used for pose estimation.
struct CameraModel {
  double vertical_fov_deg = 45.0;
  int hemisphere_width_px = 1920;
  int hemisphere_height_px = 480;
  std::optional<double> focal_length_px;
  std::optional<Point2> principal_point;

  /// (width / 2) / tan(45 deg) unless set explicitly.
  double focal() const;
  Point2 principal() const;
  void validate() const;
};

struct Participant {
  std::string id;
  Role role = Role::kBackend;
  /// Azimuth of the participant's nose in the camera frame, [-180, 180).
  double seat_angle_deg = 0.0;
};

struct SeatingLayout {
  /// Horizontal distance of every participant from the camera.
  double radius_m = 1.0;
  /// Elevation of the heads above the camera's horizontal plane.
  double seat_elevation_deg = 0.0;
  std::vector<Participant> seats;

  /// Seat index of `id`, or nullopt.
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::size_t require_index(std::string_view id) const;
  /// Throws ValidationError. `min_separation_deg` is the smallest allowed
  /// angular distance between two seats.
  void validate(double min_separation_deg) const;
};

struct LandmarkFrame {
  int frame_idx = 0;
  double timestamp_s = 0.0;
  std::string participant;
  Rect person_bbox;
  Rect face_bbox;
  /// Panorama pixels ordered as kLandmarkIndices. x may run past the
  /// panorama edges for faces straddling the seam; it is read modulo the
  /// panorama width.
  std::array<Point2, kLandmarkCount> landmarks{};
};

struct SpeechSegment {
  std::string speaker;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<std::string> text;
};

struct Session {
  int group_id = 0;
  Condition condition = Condition::kNoCoordination;
  double fps = 30.0;
  double duration_s = 0.0;
  SeatingLayout layout;
  CameraModel camera;

  /// Number of frames on the session clock: floor(duration * fps).
  int frame_count() const;
  double frame_time(int frame_idx) const { return frame_idx / fps; }
  /// Short tag such as "group3_A".
  std::string tag() const;
};

/// A fully loaded and validated bundle.
struct SessionData {
  Session session;
  std::vector<LandmarkFrame> frames;
  std::vector<SpeechSegment> segments;
  std::vector<std::string> warnings;
};

/// Seat separation floor applied by the loader; at least twice the widest
/// boundary band.
inline constexpr double kDefaultMinSeatSeparationDeg = 20.0;

/// Sorts by (start, speaker) and merges overlapping segments of the same
/// speaker. Appends one warning per merge.
std::vector<SpeechSegment> normalize_segments(std::vector<SpeechSegment> segments,
                                              std::vector<std::string>* warnings);

}  // namespace roundtable
