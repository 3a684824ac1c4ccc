#include "roundtable/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "roundtable/angles.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

SchemaError::SchemaError(std::string file, int line, const std::string& message)
    : Error(line > 0 ? fmt::format("{}:{}: {}", file, line, message)
                     : fmt::format("{}: {}", file, message)),
      file_(std::move(file)),
      line_(line) {}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kBackend:
      return "Backend";
    case Role::kFrontend:
      return "Frontend";
    case Role::kUiUx:
      return "UIUX";
    case Role::kDataPersistence:
      return "DataPersistence";
  }
  return "Backend";
}

Role role_from_string(std::string_view text) {
  if (text == "Backend") return Role::kBackend;
  if (text == "Frontend") return Role::kFrontend;
  if (text == "UIUX" || text == "UI/UX") return Role::kUiUx;
  if (text == "DataPersistence") return Role::kDataPersistence;
  throw ValidationError(fmt::format("unknown role '{}'", text));
}

std::string_view to_string(Condition condition) {
  return condition == Condition::kNoCoordination ? "A" : "B";
}

Condition condition_from_string(std::string_view text) {
  if (text == "A") return Condition::kNoCoordination;
  if (text == "B") return Condition::kPlanningPoker;
  throw ValidationError(fmt::format("unknown condition '{}' (expected A or B)", text));
}

bool Rect::contains(const Point2& p) const {
  return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h;
}

bool Rect::contains(const Rect& r) const {
  return r.x >= x && r.y >= y && r.x + r.w <= x + w && r.y + r.h <= y + h;
}

double CameraModel::focal() const {
  if (focal_length_px) return *focal_length_px;
  return (hemisphere_width_px / 2.0) / std::tan(deg_to_rad(90.0 / 2.0));
}

Point2 CameraModel::principal() const {
  if (principal_point) return *principal_point;
  return {hemisphere_width_px / 2.0, hemisphere_height_px / 2.0};
}

void CameraModel::validate() const {
  if (!(vertical_fov_deg > 0.0 && vertical_fov_deg <= 180.0)) {
    throw ValidationError(
        fmt::format("vertical_fov_deg must be in (0, 180], got {}", vertical_fov_deg));
  }
  if (hemisphere_width_px <= 0 || hemisphere_height_px <= 0) {
    throw ValidationError("hemisphere dimensions must be positive");
  }
  if (focal_length_px && !(*focal_length_px > 0.0)) {
    throw ValidationError("focal_length_px must be positive");
  }
}

std::optional<std::size_t> SeatingLayout::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < seats.size(); ++i) {
    if (seats[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t SeatingLayout::require_index(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw ValidationError(fmt::format("participant '{}' is not in the layout", id));
  return *idx;
}

void SeatingLayout::validate(double min_separation_deg) const {
  if (seats.size() != kParticipantsPerSession) {
    throw ValidationError(fmt::format("participant count must be {}, got {}",
                                      kParticipantsPerSession, seats.size()));
  }
  if (!(radius_m > 0.0)) throw ValidationError("radius_m must be positive");
  if (!(std::abs(seat_elevation_deg) < 90.0)) {
    throw ValidationError("seat_elevation_deg must be within (-90, 90)");
  }
  for (std::size_t i = 0; i < seats.size(); ++i) {
    if (seats[i].id.empty()) throw ValidationError("empty participant id");
    if (!std::isfinite(seats[i].seat_angle_deg)) {
      throw ValidationError(fmt::format("seat angle of '{}' is not finite", seats[i].id));
    }
    for (std::size_t j = i + 1; j < seats.size(); ++j) {
      if (seats[i].id == seats[j].id) {
        throw ValidationError(fmt::format("duplicate participant id '{}'", seats[i].id));
      }
      double sep = std::abs(signed_delta_deg(seats[i].seat_angle_deg, seats[j].seat_angle_deg));
      if (sep < min_separation_deg) {
        throw ValidationError(fmt::format("seats '{}' and '{}' are {:.3f} deg apart (minimum {})",
                                          seats[i].id, seats[j].id, sep, min_separation_deg));
      }
    }
  }
}

int Session::frame_count() const {
  return static_cast<int>(std::floor(duration_s * fps + 1e-9));
}

std::string Session::tag() const {
  return fmt::format("group{}_{}", group_id, to_string(condition));
}

std::vector<SpeechSegment> normalize_segments(std::vector<SpeechSegment> segments,
                                              std::vector<std::string>* warnings) {
  std::stable_sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
    if (a.speaker != b.speaker) return a.speaker < b.speaker;
    return a.start_s < b.start_s;
  });
  std::vector<SpeechSegment> merged;
  merged.reserve(segments.size());
  for (auto& seg : segments) {
    if (!merged.empty() && merged.back().speaker == seg.speaker &&
        seg.start_s < merged.back().end_s) {
      auto& last = merged.back();
      if (warnings) {
        warnings->push_back(fmt::format("merged overlapping segments of {}: [{}, {}] and [{}, {}]",
                                        seg.speaker, last.start_s, last.end_s, seg.start_s,
                                        seg.end_s));
      }
      last.end_s = std::max(last.end_s, seg.end_s);
      if (seg.text) last.text = last.text ? *last.text + " " + *seg.text : *seg.text;
      continue;
    }
    merged.push_back(std::move(seg));
  }
  std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
    if (a.start_s != b.start_s) return a.start_s < b.start_s;
    return a.speaker < b.speaker;
  });
  return merged;
}

}  // namespace roundtable
