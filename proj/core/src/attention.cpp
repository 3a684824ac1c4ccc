#include "roundtable/attention.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include <fmt/format.h>

#include "roundtable/angles.hpp"
#include "roundtable/bundle_io.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

namespace {

constexpr std::string_view kAttentionHeader = "frame_idx,observer,target";
constexpr std::string_view kReading = "READING";
constexpr std::string_view kUnfocused = "UNFOCUSED";

}  // namespace

LocationVector location_vector(double seat_angle_deg, double elevation_deg, double radius_m) {
  if (!(std::abs(elevation_deg) < 90.0)) {
    throw ValidationError(fmt::format("seat elevation {} deg outside (-90, 90)", elevation_deg));
  }
  const double a = deg_to_rad(seat_angle_deg);
  const double b = deg_to_rad(elevation_deg);
  return {radius_m * Vec3(std::cos(a), std::sin(a), std::tan(b)), seat_angle_deg, elevation_deg,
          radius_m};
}

FocusVector focus_vector(const LocationVector& location, const HeadPose& pose) {
  const double tilt = location.elevation_deg - pose.pitch_deg;
  if (!(std::abs(tilt) < 90.0)) {
    throw DegenerateError(fmt::format("gaze tilt {} deg reaches the vertical", tilt));
  }
  const double r = location.radius_m;
  const double two_y = 2.0 * deg_to_rad(pose.yaw_deg);
  const double c = std::cos(two_y);
  const double s = std::sin(two_y);
  const double lx = r + r * c;
  const double ly = r * s;
  const double h = std::hypot(lx, ly);
  const double lz = h * std::tan(deg_to_rad(tilt));
  const Vec3& v = location.v;

  FocusVector f;
  f.v_f = Vec3(-v.x() * c + v.y() * s, -v.x() * s - v.y() * c, -v.z() + lz);
  f.horiz_angle_deg = wrap_deg_180(rad_to_deg(std::atan2(f.v_f.y(), f.v_f.x())));
  f.elevation_deg = rad_to_deg(std::atan2(-f.v_f.z(), std::hypot(f.v_f.x(), f.v_f.y())));
  return f;
}

double gate_angle_deg(double elevation_deg, const CameraModel& camera, GateReference reference) {
  return reference == GateReference::kFieldBottom ? elevation_deg + camera.vertical_fov_deg / 2.0
                                                  : elevation_deg;
}

ObserverBands horizontal_thresholds(std::size_t observer, const SeatingLayout& layout,
                                    double fraction) {
  if (layout.seats.size() != kParticipantsPerSession) {
    throw ValidationError("horizontal thresholds need exactly 4 seats");
  }
  const double base = layout.seats.at(observer).seat_angle_deg;
  std::array<std::pair<double, std::size_t>, 3> others;
  std::size_t n = 0;
  for (std::size_t i = 0; i < layout.seats.size(); ++i) {
    if (i == observer) continue;
    others[n++] = {wrap_deg_360(layout.seats[i].seat_angle_deg - base), i};
  }
  std::sort(others.begin(), others.end());

  ObserverBands b;
  b.observer = observer;
  b.right = others[0].second;
  b.opposite = others[1].second;
  b.left = others[2].second;
  b.offset_right = others[0].first;
  b.offset_opposite = others[1].first;
  b.offset_left = others[2].first;
  b.u_r = fraction * (b.offset_opposite - b.offset_right);
  b.u_l = fraction * (b.offset_left - b.offset_opposite);
  b.edge_r = b.offset_opposite - b.u_r;
  b.edge_l = b.offset_opposite + b.u_l;
  return b;
}

std::vector<ObserverBands> session_bands(const SeatingLayout& layout, double fraction) {
  std::vector<ObserverBands> out;
  for (std::size_t i = 0; i < layout.seats.size(); ++i) {
    out.push_back(horizontal_thresholds(i, layout, fraction));
  }
  return out;
}

std::size_t horizontal_target(const ObserverBands& bands, double focus_azimuth_deg,
                              const SeatingLayout& layout) {
  const double phi =
      wrap_deg_360(focus_azimuth_deg - layout.seats.at(bands.observer).seat_angle_deg);
  if (phi < bands.edge_r) return bands.right;
  if (phi > bands.edge_l) return bands.left;
  return bands.opposite;
}

AttentionTarget classify_frame(const ObserverBands& bands, const FocusVector& focus,
                               const SeatingLayout& layout, const CameraModel& camera,
                               const AttentionConfig& config) {
  const double vertical = gate_angle_deg(focus.elevation_deg, camera, config.gate_reference);
  if (reading_gate(vertical, config.reading_angle_deg)) return AttentionTarget::reading();
  return AttentionTarget::participant(horizontal_target(bands, focus.horiz_angle_deg, layout));
}

AttentionTarget classify_pose(const PoseRecord& pose, const ObserverBands& bands,
                              const SeatingLayout& layout, const CameraModel& camera,
                              const AttentionConfig& config) {
  if (pose.status != PoseStatus::kOk) return AttentionTarget::unfocused();
  const auto& seat = layout.seats.at(bands.observer);
  const auto loc = location_vector(seat.seat_angle_deg, layout.seat_elevation_deg, layout.radius_m);
  try {
    return classify_frame(bands, focus_vector(loc, pose.pose), layout, camera, config);
  } catch (const DegenerateError&) {
    return AttentionTarget::unfocused();
  }
}

std::vector<AttentionRecord> classify_session(const Session& session,
                                              const std::vector<PoseRecord>& poses,
                                              const AttentionConfig& config) {
  const int frames = session.frame_count();
  const std::size_t seats = session.layout.seats.size();
  const auto bands = session_bands(session.layout, config.horizontal_fraction);

  std::vector<AttentionRecord> out(static_cast<std::size_t>(frames) * seats);
  for (int f = 0; f < frames; ++f) {
    for (std::size_t s = 0; s < seats; ++s) {
      out[static_cast<std::size_t>(f) * seats + s] = {f, s, AttentionTarget::unfocused()};
    }
  }
  for (const auto& p : poses) {
    if (p.frame_idx < 0 || p.frame_idx >= frames || p.seat >= seats) continue;
    out[static_cast<std::size_t>(p.frame_idx) * seats + p.seat].target =
        classify_pose(p, bands[p.seat], session.layout, session.camera, config);
  }
  return out;
}

std::string format_attention_dump(const std::vector<AttentionRecord>& records,
                                  const SeatingLayout& layout) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "{}\n", kAttentionHeader);
  for (const auto& r : records) {
    std::string_view target;
    switch (r.target.kind) {
      case AttentionTarget::Kind::kParticipant:
        target = layout.seats.at(r.target.seat).id;
        break;
      case AttentionTarget::Kind::kReading:
        target = kReading;
        break;
      case AttentionTarget::Kind::kUnfocused:
        target = kUnfocused;
        break;
    }
    fmt::format_to(std::back_inserter(out), "{},{},{}\n", r.frame_idx,
                   layout.seats.at(r.observer).id, target);
  }
  return fmt::to_string(out);
}

std::vector<AttentionRecord> parse_attention_dump(std::istream& in, const SeatingLayout& layout,
                                                  const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kAttentionHeader) {
    throw SchemaError(source, 1, fmt::format("expected header '{}'", kAttentionHeader));
  }
  std::vector<AttentionRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 3) throw SchemaError(source, lineno, "expected 3 fields");
    AttentionRecord r;
    r.frame_idx = io::parse_int(f[0], source, lineno, "frame_idx");
    const auto obs = layout.index_of(f[1]);
    if (!obs) throw SchemaError(source, lineno, fmt::format("unknown observer '{}'", f[1]));
    r.observer = *obs;
    if (f[2] == kReading) {
      r.target = AttentionTarget::reading();
    } else if (f[2] == kUnfocused) {
      r.target = AttentionTarget::unfocused();
    } else {
      const auto t = layout.index_of(f[2]);
      if (!t) throw SchemaError(source, lineno, fmt::format("unknown target '{}'", f[2]));
      if (*t == r.observer) throw SchemaError(source, lineno, "observer attends to itself");
      r.target = AttentionTarget::participant(*t);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace roundtable
