#include "roundtable/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/angles.hpp"
#include "roundtable/bundle_io.hpp"
#include "roundtable/errors.hpp"
#include "roundtable/panorama.hpp"

namespace roundtable {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kRollRangeDeg = 10.0;
constexpr double kReadingYawRangeDeg = 20.0;
constexpr double kReadingDepressionLoDeg = 40.0;
constexpr double kReadingDepressionHiDeg = 50.0;
constexpr double kFacePad = 0.3;
constexpr std::uint64_t kRetryStride = 0x9E3779B97F4A7C15ull;
constexpr int kMaxRetries = 64;

std::string_view kind_name(GazeInterval::Kind k) {
  switch (k) {
    case GazeInterval::Kind::kLook:
      return "look";
    case GazeInterval::Kind::kReading:
      return "reading";
    case GazeInterval::Kind::kAbsent:
      return "absent";
  }
  return "absent";
}

GazeInterval::Kind kind_from(std::string_view s, const std::string& source) {
  if (s == "look") return GazeInterval::Kind::kLook;
  if (s == "reading") return GazeInterval::Kind::kReading;
  if (s == "absent") return GazeInterval::Kind::kAbsent;
  throw SchemaError(source, 0, fmt::format("unknown gaze kind '{}'", s));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double round_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

// Everything about one gaze interval that does not change from frame to frame.
struct Prepared {
  const GazeInterval* interval = nullptr;
  std::array<Vec3, kLandmarkCount> world{};
  AttentionTarget target;
  double margin_deg = 0.0;
  EulerDeg pose;
};

Vec3 nose_position(const SeatingLayout& layout, std::size_t seat) {
  const double a = deg_to_rad(layout.seats[seat].seat_angle_deg);
  return layout.radius_m *
         Vec3(std::cos(a), std::sin(a), std::tan(deg_to_rad(layout.seat_elevation_deg)));
}

// Columns: face x (subject's right), y (up), z (into the head) in world axes.
Mat3 face_axes(const Vec3& gaze, double roll_deg) {
  const Vec3 z = -gaze.normalized();
  Vec3 y = Vec3::UnitZ() - Vec3::UnitZ().dot(z) * z;
  if (y.norm() < 1e-9) throw ValidationError("scenario rejected: vertical gaze");
  y.normalize();
  const double c = std::cos(deg_to_rad(roll_deg));
  const double s = std::sin(deg_to_rad(roll_deg));
  y = c * y + s * z.cross(y);
  Mat3 m;
  m.col(0) = y.cross(z);
  m.col(1) = y;
  m.col(2) = z;
  return m;
}

// Ray from the nose along the gaze, intersected with the seat circle.
void ray_cast(const Session& session, const ObserverBands& bands, const Vec3& nose,
              const Vec3& gaze, const AttentionConfig& config, Prepared& p) {
  const auto& layout = session.layout;
  const Eigen::Vector2d n(nose.x(), nose.y());
  const Eigen::Vector2d g(gaze.x(), gaze.y());
  const double gg = g.squaredNorm();
  Vec3 end = nose;
  if (gg > 1e-18) {
    const double s = -2.0 * n.dot(g) / gg;
    end = nose + std::max(s, 0.0) * gaze;
  }
  const double horiz = std::hypot(end.x(), end.y());
  const double az = rad_to_deg(std::atan2(end.y(), end.x()));
  const double elev = rad_to_deg(std::atan2(end.z(), horiz));
  const double vertical = gate_angle_deg(elev, session.camera, config.gate_reference);
  const double margin_v = std::abs(vertical - config.reading_angle_deg);
  if (reading_gate(vertical, config.reading_angle_deg)) {
    p.target = AttentionTarget::reading();
    p.margin_deg = margin_v;
    return;
  }
  p.target = AttentionTarget::participant(horizontal_target(bands, az, layout));
  const double phi = wrap_deg_360(az - layout.seats[bands.observer].seat_angle_deg);
  p.margin_deg =
      std::min({margin_v, std::abs(phi - bands.edge_r), std::abs(phi - bands.edge_l)});
}

std::vector<std::vector<Prepared>> prepare(const Scenario& sc, const FaceModel3D& model,
                                           const AttentionConfig& config, std::mt19937_64& rng) {
  const auto& session = sc.session;
  const auto& layout = session.layout;
  const auto bands = session_bands(layout, config.horizontal_fraction);
  const double half_fov = session.camera.vertical_fov_deg / 2.0;
  std::vector<std::vector<Prepared>> out(layout.seats.size());

  for (std::size_t s = 0; s < layout.seats.size(); ++s) {
    const auto it = sc.gaze.find(layout.seats[s].id);
    if (it == sc.gaze.end()) continue;
    const Vec3 nose = nose_position(layout, s);
    const Vec3 to_camera = -nose.normalized();
    const PerspectiveView view = view_along(nose);
    for (const auto& iv : it->second) {
      Prepared p;
      p.interval = &iv;
      const double roll = iv.roll_deg ? *iv.roll_deg : uniform(rng, -kRollRangeDeg, kRollRangeDeg);
      if (iv.kind == GazeInterval::Kind::kAbsent) {
        p.target = AttentionTarget::unfocused();
        out[s].push_back(p);
        continue;
      }
      Vec3 gaze;
      if (iv.kind == GazeInterval::Kind::kLook) {
        gaze = (nose_position(layout, layout.require_index(iv.target)) - nose).normalized();
      } else {
        const double yaw = iv.yaw_offset_deg ? *iv.yaw_offset_deg
                                             : uniform(rng, -kReadingYawRangeDeg, kReadingYawRangeDeg);
        const double dep = iv.depression_deg
                               ? *iv.depression_deg
                               : uniform(rng, kReadingDepressionLoDeg, kReadingDepressionHiDeg);
        const double base = rad_to_deg(std::atan2(-nose.y(), -nose.x())) + yaw;
        gaze = direction_from_angles(base, -dep);
      }
      const double turn = rad_to_deg(std::acos(std::clamp(gaze.dot(to_camera), -1.0, 1.0)));
      if (turn > kMaxFaceTurnDeg) {
        throw ValidationError(fmt::format("scenario rejected: {} turns {:.1f} deg from the camera",
                                          layout.seats[s].id, turn));
      }
      const Mat3 m = face_axes(gaze, roll);
      for (std::size_t k = 0; k < kLandmarkCount; ++k) {
        p.world[k] = nose + m * (model.points[k] / model.units_per_meter);
        const auto ang = angles_of(p.world[k]);
        if (std::abs(ang.elevation_deg) >= half_fov) {
          throw ValidationError(fmt::format(
              "scenario rejected: landmark {} of {} leaves the vertical field ({:.2f} deg)",
              kLandmarkIndices[k], layout.seats[s].id, ang.elevation_deg));
        }
      }
      p.pose = matrix_to_euler(view.world_to_camera * m);
      ray_cast(session, bands[s], nose, gaze, config, p);
      out[s].push_back(p);
    }
  }
  return out;
}

// Is [t0, t1) covered by the union of the speaker's segments?
bool covered(const std::vector<const SpeechSegment*>& segs, double t0, double t1) {
  double cur = t0;
  bool moved = true;
  while (cur < t1 && moved) {
    moved = false;
    for (const auto* s : segs) {
      if (s->start_s <= cur && cur < s->end_s) {
        cur = s->end_s;
        moved = true;
      }
    }
  }
  return cur >= t1;
}

ordered_json interval_json(const GazeInterval& iv) {
  ordered_json j;
  j["start"] = iv.start_s;
  j["end"] = iv.end_s;
  j["kind"] = kind_name(iv.kind);
  if (iv.kind == GazeInterval::Kind::kLook) j["target"] = iv.target;
  if (iv.roll_deg) j["roll_deg"] = *iv.roll_deg;
  if (iv.yaw_offset_deg) j["yaw_offset_deg"] = *iv.yaw_offset_deg;
  if (iv.depression_deg) j["depression_deg"] = *iv.depression_deg;
  return j;
}

}  // namespace

void Scenario::validate() const {
  session.camera.validate();
  session.layout.validate(kDefaultMinSeatSeparationDeg);
  if (!(session.fps > 0.0)) throw ValidationError("scenario fps must be positive");
  if (!(session.duration_s > 0.0 && session.duration_s <= kMaxSessionDurationS)) {
    throw ValidationError(fmt::format("scenario duration {} outside (0, {}]", session.duration_s,
                                      kMaxSessionDurationS));
  }
  if (!(noise_px >= 0.0)) throw ValidationError("noise_px must be non-negative");
  for (const auto& [id, ivs] : gaze) {
    const std::size_t self = session.layout.require_index(id);
    double prev_end = 0.0;
    for (const auto& iv : ivs) {
      if (!(iv.start_s >= prev_end && iv.start_s < iv.end_s && iv.end_s <= session.duration_s)) {
        throw ValidationError(fmt::format(
            "gaze script of {}: interval [{}, {}) overlaps, is empty or leaves the session", id,
            iv.start_s, iv.end_s));
      }
      prev_end = iv.end_s;
      if (iv.kind == GazeInterval::Kind::kLook) {
        const auto t = session.layout.index_of(iv.target);
        if (!t || *t == self) {
          throw ValidationError(fmt::format("gaze script of {}: invalid target '{}'", id, iv.target));
        }
      }
    }
  }
  for (const auto& s : speech) {
    session.layout.require_index(s.speaker);
    if (!(s.start_s >= 0.0 && s.start_s < s.end_s && s.end_s <= session.duration_s)) {
      throw ValidationError(fmt::format("speech of {} [{}, {}) leaves the session", s.speaker,
                                        s.start_s, s.end_s));
    }
  }
}

Scenario parse_scenario(std::string_view json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object() || doc.value("format", std::string()) != kScenarioFormat) {
    throw SchemaError(source, 0, fmt::format("expected format '{}'", kScenarioFormat));
  }
  Scenario sc;
  try {
    json layout_doc = doc;
    layout_doc.erase("format");
    sc.session = io::parse_layout(layout_doc.dump(), source);
    sc.session.fps = doc.at("fps").get<double>();
    sc.seed = doc.value("seed", std::uint64_t{0});
    sc.noise_px = doc.value("noise_px", 0.0);
    for (const auto& [id, arr] : doc.at("gaze").items()) {
      auto& ivs = sc.gaze[id];
      for (const auto& j : arr) {
        GazeInterval iv;
        iv.start_s = j.at("start").get<double>();
        iv.end_s = j.at("end").get<double>();
        iv.kind = kind_from(j.at("kind").get<std::string>(), source);
        if (iv.kind == GazeInterval::Kind::kLook) iv.target = j.at("target").get<std::string>();
        if (j.contains("roll_deg")) iv.roll_deg = j["roll_deg"].get<double>();
        if (j.contains("yaw_offset_deg")) iv.yaw_offset_deg = j["yaw_offset_deg"].get<double>();
        if (j.contains("depression_deg")) iv.depression_deg = j["depression_deg"].get<double>();
        ivs.push_back(std::move(iv));
      }
    }
    for (const auto& j : doc.value("speech", json::array())) {
      sc.speech.push_back({j.at("speaker").get<std::string>(), j.at("start").get<double>(),
                           j.at("end").get<double>(), std::nullopt});
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, e.what());
  }
  sc.validate();
  return sc;
}

std::string format_scenario(const Scenario& sc) {
  const json layout = json::parse(io::format_layout(sc.session));
  ordered_json doc;
  doc["format"] = kScenarioFormat;
  doc["seed"] = sc.seed;
  doc["noise_px"] = sc.noise_px;
  doc["fps"] = sc.session.fps;
  for (const char* key : {"group_id", "condition", "duration_s", "camera", "layout"}) {
    doc[key] = ordered_json::parse(layout.at(key).dump());
  }
  ordered_json gaze = ordered_json::object();
  for (const auto& p : sc.session.layout.seats) {
    const auto it = sc.gaze.find(p.id);
    if (it == sc.gaze.end()) continue;
    ordered_json arr = ordered_json::array();
    for (const auto& iv : it->second) arr.push_back(interval_json(iv));
    gaze[p.id] = std::move(arr);
  }
  doc["gaze"] = std::move(gaze);
  ordered_json speech = ordered_json::array();
  for (const auto& s : sc.speech) {
    speech.push_back({{"speaker", s.speaker}, {"start", s.start_s}, {"end", s.end_s}});
  }
  doc["speech"] = std::move(speech);
  return doc.dump(2) + "\n";
}

Synthesis synthesize(const Scenario& sc, const FaceModel3D& model, const AttentionConfig& config) {
  sc.validate();
  model.validate();
  std::mt19937_64 rng(sc.seed);
  const auto prepared = prepare(sc, model, config, rng);
  const auto& session = sc.session;
  const auto& layout = session.layout;
  const std::size_t seats = layout.seats.size();
  const int frames = session.frame_count();
  std::normal_distribution<double> jitter(0.0, 1.0);

  std::vector<std::vector<const SpeechSegment*>> speech_of(seats);
  for (const auto& s : sc.speech) speech_of[layout.require_index(s.speaker)].push_back(&s);

  Synthesis out;
  out.bundle.session = session;
  out.bundle.segments = normalize_segments(sc.speech, &out.bundle.warnings);
  out.truth.frames.reserve(static_cast<std::size_t>(frames) * seats);
  std::vector<std::size_t> cursor(seats, 0);

  for (int f = 0; f < frames; ++f) {
    const double t = session.frame_time(f);
    for (std::size_t s = 0; s < seats; ++s) {
      FrameTruth truth;
      truth.frame_idx = f;
      truth.observer = s;
      truth.target = AttentionTarget::unfocused();
      const auto& ivs = prepared[s];
      std::size_t& c = cursor[s];
      while (c < ivs.size() && ivs[c].interval->end_s <= t) ++c;
      const Prepared* p =
          (c < ivs.size() && ivs[c].interval->start_s <= t) ? &ivs[c] : nullptr;
      if (p && p->interval->kind != GazeInterval::Kind::kAbsent) {
        truth.target = p->target;
        truth.margin_deg = p->margin_deg;
        truth.pose = p->pose;

        LandmarkFrame lf;
        lf.frame_idx = f;
        lf.timestamp_s = t;
        lf.participant = layout.seats[s].id;
        std::optional<double> near;
        for (std::size_t k = 0; k < kLandmarkCount; ++k) {
          Point2 px = angles_to_pixel(angles_of(p->world[k]), session.camera, near);
          if (!near) near = px.x;
          if (sc.noise_px > 0.0) {
            px.x += sc.noise_px * jitter(rng);
            px.y += sc.noise_px * jitter(rng);
          }
          lf.landmarks[k] = px;
        }
        double x0 = lf.landmarks[0].x, x1 = x0, y0 = lf.landmarks[0].y, y1 = y0;
        for (const auto& q : lf.landmarks) {
          x0 = std::min(x0, q.x);
          x1 = std::max(x1, q.x);
          y0 = std::min(y0, q.y);
          y1 = std::max(y1, q.y);
        }
        const double pw = kFacePad * (x1 - x0) + 1.0;
        const double ph = kFacePad * (y1 - y0) + 1.0;
        lf.face_bbox = {x0 - pw, y0 - ph, (x1 - x0) + 2.0 * pw, (y1 - y0) + 2.0 * ph};
        const Rect& fb = lf.face_bbox;
        lf.person_bbox = {fb.x - 0.75 * fb.w, fb.y - 0.3 * fb.h, 2.5 * fb.w, 4.0 * fb.h};
        out.bundle.frames.push_back(std::move(lf));

        if (truth.target.is_participant()) {
          const std::size_t tgt = truth.target.seat;
          if (covered(speech_of[tgt], t, (f + 1) / session.fps)) ++out.truth.pair_frames[s][tgt];
        }
      }
      out.truth.frames.push_back(truth);
    }
  }
  for (std::size_t o = 0; o < seats; ++o) {
    for (std::size_t t = 0; t < seats; ++t) {
      out.truth.pair_attention_s[o][t] = static_cast<double>(out.truth.pair_frames[o][t]) / session.fps;
    }
  }
  return out;
}

Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& options) {
  static constexpr std::array<Role, 4> kRoles{Role::kBackend, Role::kFrontend, Role::kUiUx,
                                              Role::kDataPersistence};
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt) * kRetryStride);
    Scenario sc;
    sc.seed = seed;
    sc.noise_px = options.noise_px;
    Session& s = sc.session;
    s.group_id = options.group_id;
    s.condition = options.condition;
    s.fps = options.fps;
    s.duration_s = options.duration_s;
    s.layout.radius_m = round_ms(uniform(rng, 0.85, 1.0));
    s.layout.seat_elevation_deg = round_ms(uniform(rng, 12.0, 16.0));
    const double rot = uniform(rng, 0.0, 360.0);
    for (int i = 0; i < 4; ++i) {
      const double jit = uniform(rng, -options.seat_jitter_deg, options.seat_jitter_deg);
      s.layout.seats.push_back({fmt::format("P{}", i + 1), kRoles[static_cast<std::size_t>(i)],
                                round_ms(wrap_deg_180(rot + 90.0 * i + jit))});
    }

    for (int i = 0; i < 4; ++i) {
      const std::string id = s.layout.seats[static_cast<std::size_t>(i)].id;
      auto& ivs = sc.gaze[id];
      double t = 0.0;
      while (t < s.duration_s) {
        GazeInterval iv;
        iv.start_s = t;
        iv.end_s = std::min(s.duration_s, round_ms(t + uniform(rng, 0.5, 4.0)));
        const double u = uniform(rng, 0.0, 1.0);
        iv.roll_deg = round_ms(uniform(rng, -kRollRangeDeg, kRollRangeDeg));
        if (u < options.absent_probability) {
          iv.kind = GazeInterval::Kind::kAbsent;
        } else if (u < options.absent_probability + options.reading_probability) {
          iv.kind = GazeInterval::Kind::kReading;
          iv.yaw_offset_deg = round_ms(uniform(rng, -kReadingYawRangeDeg, kReadingYawRangeDeg));
          iv.depression_deg = round_ms(uniform(rng, kReadingDepressionLoDeg, kReadingDepressionHiDeg));
        } else {
          int other = static_cast<int>(uniform(rng, 0.0, 3.0));
          other = std::min(other, 2);
          const int target = (i + 1 + other) % 4;
          iv.target = s.layout.seats[static_cast<std::size_t>(target)].id;
        }
        t = iv.end_s;
        ivs.push_back(std::move(iv));
      }

      double st = round_ms(uniform(rng, 0.0, 3.0));
      while (st < s.duration_s) {
        const double en = std::min(s.duration_s, round_ms(st + uniform(rng, 0.5, 6.0)));
        if (en > st) sc.speech.push_back({id, st, en, std::nullopt});
        st = round_ms(en + uniform(rng, 0.5, 10.0));
      }
    }
    std::sort(sc.speech.begin(), sc.speech.end(), [](const auto& a, const auto& b) {
      return std::tie(a.start_s, a.speaker) < std::tie(b.start_s, b.speaker);
    });

    try {
      sc.validate();
      std::mt19937_64 probe(sc.seed);
      prepare(sc, FaceModel3D::generic_v1(), {}, probe);
      return sc;
    } catch (const ValidationError&) {
      continue;
    }
  }
  throw ValidationError(fmt::format("no valid random scenario for seed {}", seed));
}

}  // namespace roundtable
