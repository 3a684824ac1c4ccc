#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roundtable/alignment.hpp"
#include "roundtable/attention.hpp"
#include "roundtable/face_model.hpp"
#include "roundtable/model.hpp"

namespace roundtable {

inline constexpr std::string_view kScenarioFormat = "roundtable-scenario/1";

/// What one participant does over [start_s, end_s).
struct GazeInterval {
  enum class Kind { kLook, kReading, kAbsent };
  double start_s = 0.0;
  double end_s = 0.0;
  Kind kind = Kind::kLook;
  std::string target;  // kLook only
  /// Head roll about the gaze axis; drawn from the seed when absent.
  std::optional<double> roll_deg;
  /// kReading only: horizontal offset from the camera direction and
  /// downward tilt of the gaze below the horizontal.
  std::optional<double> yaw_offset_deg;
  std::optional<double> depression_deg;
};

struct Scenario {
  std::uint64_t seed = 0;
  /// Isotropic Gaussian landmark jitter, pixels (sigma).
  double noise_px = 0.0;
  Session session;  // includes fps
  std::map<std::string, std::vector<GazeInterval>> gaze;
  std::vector<SpeechSegment> speech;

  /// Throws ValidationError.
  void validate() const;
};

Scenario parse_scenario(std::string_view json_text, const std::string& source);
std::string format_scenario(const Scenario& scenario);

struct FrameTruth {
  int frame_idx = 0;
  std::size_t observer = 0;
  /// Ray-cast label: the gaze ray meets the seat circle at the chord end
  /// point E; Reading when E sits below the reading gate, else the region
  /// of E's azimuth.
  AttentionTarget target;
  /// Angular distance from E to the nearest decision boundary (region edges
  /// for participant labels, the reading gate for every present frame).
  double margin_deg = 0.0;
  /// Head orientation in the perspective view aimed at the true nose.
  EulerDeg pose;
};

struct GroundTruth {
  std::vector<FrameTruth> frames;  // frame-major, seat order, every frame
  /// Frames attending a speaking target, by brute-force interval coverage.
  PairFrames pair_frames{};
  std::array<std::array<double, kParticipantsPerSession>, kParticipantsPerSession> pair_attention_s{};
};

struct Synthesis {
  SessionData bundle;
  GroundTruth truth;
};

/// Look-at construction per frame, projection of the face model through the
/// panorama, seeded jitter, diarization from the speech script. Throws
/// ValidationError("scenario rejected: ...") when a face turns more than
/// kMaxFaceTurnDeg from the camera or a landmark leaves the vertical field.
Synthesis synthesize(const Scenario& scenario, const FaceModel3D& model = FaceModel3D::generic_v1(),
                     const AttentionConfig& config = {});

inline constexpr double kMaxFaceTurnDeg = 80.0;

struct RandomScenarioOptions {
  int group_id = 1;
  Condition condition = Condition::kNoCoordination;
  double fps = 30.0;
  double duration_s = 60.0;
  double noise_px = 0.0;
  double seat_jitter_deg = 8.0;
  double reading_probability = 0.2;
  double absent_probability = 0.05;
};

/// Square seating with random rotation and jitter, random dwell-time gaze
/// script and speech. Rejected draws are retried with derived seeds.
Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& options = {});

}  // namespace roundtable
