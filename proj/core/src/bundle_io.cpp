#include "roundtable/bundle_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/errors.hpp"

namespace roundtable::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTimestampWarnToleranceS = 1e-3;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(source, 0, fmt::format("invalid JSON: {}", e.what()));
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& source) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(source, 0, fmt::format("missing field '{}'", key));
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(source, 0, fmt::format("field '{}': {}", key, e.what()));
  }
}

std::vector<std::string> landmark_columns() {
  std::vector<std::string> cols = {"frame_idx", "timestamp_s", "participant", "person_x",
                                   "person_y",  "person_w",    "person_h",    "face_x",
                                   "face_y",    "face_w",      "face_h"};
  for (int idx : kLandmarkIndices) {
    cols.push_back(fmt::format("lm{}_x", idx));
    cols.push_back(fmt::format("lm{}_y", idx));
  }
  return cols;
}

LandmarkHeader parse_header_line(std::string_view line, const std::string& source) {
  line = trim(line);
  if (line.empty() || line.front() != '#') {
    throw SchemaError(source, 1, "first line must be the '#' header declaring fps and geometry");
  }
  line.remove_prefix(1);
  std::istringstream words{std::string(line)};
  std::string word;
  std::map<std::string, std::string> kv;
  bool format_seen = false;
  while (words >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) {
      if (word != kLandmarkFormat) {
        throw SchemaError(source, 1, fmt::format("unknown landmark format tag '{}'", word));
      }
      format_seen = true;
      continue;
    }
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  if (!format_seen) throw SchemaError(source, 1, "missing format tag");
  auto get = [&](const char* key) -> std::string_view {
    auto it = kv.find(key);
    if (it == kv.end()) throw SchemaError(source, 1, fmt::format("header lacks '{}'", key));
    return it->second;
  };
  LandmarkHeader h;
  h.fps = parse_double(get("fps"), source, 1, "fps");
  h.hemisphere_width_px = parse_int(get("hemisphere_width_px"), source, 1, "hemisphere_width_px");
  h.hemisphere_height_px =
      parse_int(get("hemisphere_height_px"), source, 1, "hemisphere_height_px");
  h.vertical_fov_deg = parse_double(get("vertical_fov_deg"), source, 1, "vertical_fov_deg");
  if (!(h.fps > 0.0)) throw SchemaError(source, 1, "fps must be positive");
  return h;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                    : comma - start);
    out.emplace_back(trim(field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view text, const std::string& source, int line,
                    std::string_view field) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw SchemaError(source, line, fmt::format("field '{}': '{}' is not a finite number", field,
                                                text));
  }
  return value;
}

int parse_int(std::string_view text, const std::string& source, int line,
              std::string_view field) {
  text = trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw SchemaError(source, line, fmt::format("field '{}': '{}' is not an integer", field, text));
  }
  return value;
}

// ---------------------------------------------------------------------------
// layout

Session parse_layout(std::string_view json_text, const std::string& source) {
  json doc = parse_json(json_text, source);
  if (!doc.is_object()) throw SchemaError(source, 0, "layout must be a JSON object");
  if (auto it = doc.find("format"); it != doc.end() && *it != kLayoutFormat) {
    throw SchemaError(source, 0, fmt::format("unsupported layout format {}", it->dump()));
  }
  Session s;
  s.group_id = require<int>(doc, "group_id", source);
  try {
    s.condition = condition_from_string(require<std::string>(doc, "condition", source));
  } catch (const ValidationError& e) {
    throw SchemaError(source, 0, e.what());
  }
  s.duration_s = require<double>(doc, "duration_s", source);

  const json cam = require<json>(doc, "camera", source);
  s.camera.vertical_fov_deg = cam.value("vertical_fov_deg", 45.0);
  s.camera.hemisphere_width_px = require<int>(cam, "hemisphere_width_px", source);
  s.camera.hemisphere_height_px = require<int>(cam, "hemisphere_height_px", source);
  if (cam.contains("focal_length_px")) s.camera.focal_length_px = cam["focal_length_px"].get<double>();
  if (cam.contains("principal_point")) {
    auto pp = cam["principal_point"].get<std::vector<double>>();
    if (pp.size() != 2) throw SchemaError(source, 0, "principal_point must have 2 entries");
    s.camera.principal_point = Point2{pp[0], pp[1]};
  }
  if (auto hfov = cam.find("horizontal_fov_deg"); hfov != cam.end() && hfov->get<double>() != 360.0) {
    throw SchemaError(source, 0, "horizontal_fov_deg must be 360");
  }

  const json lay = require<json>(doc, "layout", source);
  s.layout.radius_m = require<double>(lay, "radius_m", source);
  s.layout.seat_elevation_deg = require<double>(lay, "seat_elevation_deg", source);
  for (const auto& seat : require<json>(lay, "seats", source)) {
    Participant p;
    p.id = require<std::string>(seat, "id", source);
    try {
      p.role = role_from_string(seat.value("role", std::string("Backend")));
    } catch (const ValidationError& e) {
      throw SchemaError(source, 0, e.what());
    }
    p.seat_angle_deg = require<double>(seat, "angle_deg", source);
    s.layout.seats.push_back(std::move(p));
  }
  return s;
}

std::string format_layout(const Session& session) {
  json cam = {{"vertical_fov_deg", session.camera.vertical_fov_deg},
              {"horizontal_fov_deg", 360.0},
              {"hemisphere_width_px", session.camera.hemisphere_width_px},
              {"hemisphere_height_px", session.camera.hemisphere_height_px}};
  if (session.camera.focal_length_px) cam["focal_length_px"] = *session.camera.focal_length_px;
  if (session.camera.principal_point) {
    cam["principal_point"] = {session.camera.principal_point->x, session.camera.principal_point->y};
  }
  json seats = json::array();
  for (const auto& p : session.layout.seats) {
    seats.push_back({{"id", p.id}, {"role", to_string(p.role)}, {"angle_deg", p.seat_angle_deg}});
  }
  json doc = {{"format", kLayoutFormat},
              {"group_id", session.group_id},
              {"condition", to_string(session.condition)},
              {"duration_s", session.duration_s},
              {"camera", cam},
              {"layout",
               {{"radius_m", session.layout.radius_m},
                {"seat_elevation_deg", session.layout.seat_elevation_deg},
                {"seats", seats}}}};
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// landmarks

LandmarkTrack parse_landmarks(std::istream& in, const std::string& source) {
  LandmarkTrack track;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(source, 0, "empty landmark file");
  track.header = parse_header_line(line, source);

  const auto expected = landmark_columns();
  if (!std::getline(in, line)) throw SchemaError(source, 2, "missing column header");
  if (split_csv_line(line) != expected) {
    throw SchemaError(source, 2, fmt::format("column header must be '{}'", fmt::join(expected, ",")));
  }
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != expected.size()) {
      throw SchemaError(source, lineno,
                        fmt::format("expected {} fields, got {}", expected.size(), f.size()));
    }
    LandmarkFrame fr;
    fr.frame_idx = parse_int(f[0], source, lineno, expected[0]);
    fr.timestamp_s = parse_double(f[1], source, lineno, expected[1]);
    fr.participant = f[2];
    auto num = [&](std::size_t i) { return parse_double(f[i], source, lineno, expected[i]); };
    fr.person_bbox = {num(3), num(4), num(5), num(6)};
    fr.face_bbox = {num(7), num(8), num(9), num(10)};
    for (std::size_t k = 0; k < kLandmarkCount; ++k) {
      fr.landmarks[k] = {num(11 + 2 * k), num(12 + 2 * k)};
    }
    if (fr.frame_idx < 0) throw SchemaError(source, lineno, "frame_idx must be non-negative");
    if (fr.face_bbox.w <= 0 || fr.face_bbox.h <= 0 || fr.person_bbox.w <= 0 ||
        fr.person_bbox.h <= 0) {
      throw SchemaError(source, lineno, "bounding boxes must have positive size");
    }
    for (std::size_t k = 0; k < kLandmarkCount; ++k) {
      if (!fr.face_bbox.contains(fr.landmarks[k])) {
        throw SchemaError(source, lineno,
                          fmt::format("landmark {} lies outside the face box", kLandmarkIndices[k]));
      }
    }
    if (!fr.person_bbox.contains(fr.face_bbox)) {
      throw SchemaError(source, lineno, "face box lies outside the person box");
    }
    track.frames.push_back(std::move(fr));
  }
  return track;
}

std::string format_landmarks(const LandmarkHeader& header,
                             const std::vector<LandmarkFrame>& frames) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out),
                 "# {} fps={} hemisphere_width_px={} hemisphere_height_px={} vertical_fov_deg={}\n",
                 kLandmarkFormat, header.fps, header.hemisphere_width_px,
                 header.hemisphere_height_px, header.vertical_fov_deg);
  fmt::format_to(std::back_inserter(out), "{}\n", fmt::join(landmark_columns(), ","));
  for (const auto& fr : frames) {
    fmt::format_to(std::back_inserter(out), "{},{:.6f},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}",
                   fr.frame_idx, fr.timestamp_s, fr.participant, fr.person_bbox.x,
                   fr.person_bbox.y, fr.person_bbox.w, fr.person_bbox.h, fr.face_bbox.x,
                   fr.face_bbox.y, fr.face_bbox.w, fr.face_bbox.h);
    for (const auto& p : fr.landmarks) {
      fmt::format_to(std::back_inserter(out), ",{:.4f},{:.4f}", p.x, p.y);
    }
    out.push_back('\n');
  }
  return fmt::to_string(out);
}

// ---------------------------------------------------------------------------
// diarization

std::vector<SpeechSegment> parse_diarization(std::string_view json_text,
                                             const std::string& source) {
  json doc = parse_json(json_text, source);
  if (!doc.is_object() || !doc.contains("segments") || !doc["segments"].is_array()) {
    throw SchemaError(source, 0, "diarization must be an object with a 'segments' array");
  }
  std::vector<SpeechSegment> out;
  int index = 0;
  for (const auto& item : doc["segments"]) {
    SpeechSegment seg;
    try {
      seg.speaker = item.at("speaker").get<std::string>();
      seg.start_s = item.at("start").get<double>();
      seg.end_s = item.at("end").get<double>();
      if (item.contains("text") && !item["text"].is_null()) seg.text = item["text"].get<std::string>();
    } catch (const json::exception& e) {
      throw SchemaError(source, 0, fmt::format("segment #{}: {}", index, e.what()));
    }
    if (!(seg.start_s < seg.end_s) || seg.start_s < 0.0) {
      throw SchemaError(source, 0,
                        fmt::format("segment #{} ({}): need 0 <= start < end, got [{}, {}]", index,
                                    seg.speaker, seg.start_s, seg.end_s));
    }
    out.push_back(std::move(seg));
    ++index;
  }
  return out;
}

std::string format_diarization(const std::vector<SpeechSegment>& segments) {
  json arr = json::array();
  for (const auto& s : segments) {
    json item = {{"speaker", s.speaker}, {"start", s.start_s}, {"end", s.end_s}};
    if (s.text) item["text"] = *s.text;
    arr.push_back(std::move(item));
  }
  return json{{"segments", arr}}.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// bundle

LandmarkHeader header_for(const Session& session) {
  return {session.fps, session.camera.hemisphere_width_px, session.camera.hemisphere_height_px,
          session.camera.vertical_fov_deg};
}

SessionData assemble_session(Session layout, LandmarkTrack track,
                             std::vector<SpeechSegment> segments, const LoadOptions& options,
                             const std::string& source) {
  SessionData data;
  data.session = std::move(layout);
  Session& s = data.session;
  s.fps = options.fps_override.value_or(track.header.fps);
  if (!(s.fps > 0.0)) throw ValidationError("fps must be positive");
  if (!(s.duration_s > 0.0 && s.duration_s <= kMaxSessionDurationS)) {
    throw ValidationError(fmt::format("{}: duration_s must be in (0, {}], got {}", source,
                                      kMaxSessionDurationS, s.duration_s));
  }
  s.camera.validate();
  s.layout.validate(options.min_seat_separation_deg);

  const auto& h = track.header;
  if (h.hemisphere_width_px != s.camera.hemisphere_width_px ||
      h.hemisphere_height_px != s.camera.hemisphere_height_px ||
      h.vertical_fov_deg != s.camera.vertical_fov_deg) {
    throw ValidationError(fmt::format("{}: landmark header geometry does not match the layout camera",
                                      source));
  }

  const int frame_count = s.frame_count();
  std::set<std::pair<int, std::size_t>> seen;
  int worst_line = -1;
  double worst_dt = 0.0;
  for (const auto& fr : track.frames) {
    auto seat = s.layout.index_of(fr.participant);
    if (!seat) {
      throw ValidationError(fmt::format("{}: frame {} names participant '{}' not in the layout",
                                        source, fr.frame_idx, fr.participant));
    }
    if (fr.frame_idx >= frame_count) {
      throw ValidationError(fmt::format("{}: frame {} is beyond the session clock ({} frames)",
                                        source, fr.frame_idx, frame_count));
    }
    if (!seen.emplace(fr.frame_idx, *seat).second) {
      throw ValidationError(fmt::format("{}: duplicate record for frame {} participant {}", source,
                                        fr.frame_idx, fr.participant));
    }
    double dt = std::abs(fr.timestamp_s - s.frame_time(fr.frame_idx));
    if (dt > worst_dt) {
      worst_dt = dt;
      worst_line = fr.frame_idx;
    }
  }
  if (worst_dt > kTimestampWarnToleranceS) {
    data.warnings.push_back(fmt::format(
        "timestamps deviate from frame_idx / fps by up to {:.6f} s (frame {}); using frame_idx / fps",
        worst_dt, worst_line));
  }
  data.frames = std::move(track.frames);
  std::sort(data.frames.begin(), data.frames.end(), [&](const auto& a, const auto& b) {
    if (a.frame_idx != b.frame_idx) return a.frame_idx < b.frame_idx;
    return *s.layout.index_of(a.participant) < *s.layout.index_of(b.participant);
  });

  for (const auto& seg : segments) {
    if (!s.layout.index_of(seg.speaker)) {
      throw ValidationError(fmt::format("{}: diarization speaker '{}' is not in the layout", source,
                                        seg.speaker));
    }
  }
  data.segments = normalize_segments(std::move(segments), &data.warnings);
  return data;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(fmt::format("write failed for {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

SessionData load_session(const fs::path& bundle_dir, const LoadOptions& options) {
  const auto layout_path = bundle_dir / kLayoutFile;
  const auto landmark_path = bundle_dir / kLandmarkFile;
  const auto diar_path = bundle_dir / kDiarizationFile;

  Session layout = parse_layout(read_text_file(layout_path), layout_path.string());
  std::ifstream lm(landmark_path);
  if (!lm) throw SchemaError(landmark_path.string(), 0, "cannot open file");
  LandmarkTrack track = parse_landmarks(lm, landmark_path.string());
  auto segments = parse_diarization(read_text_file(diar_path), diar_path.string());
  return assemble_session(std::move(layout), std::move(track), std::move(segments), options,
                          bundle_dir.string());
}

void save_session(const SessionData& data, const fs::path& bundle_dir) {
  fs::create_directories(bundle_dir);
  write_text_file(bundle_dir / kLayoutFile, format_layout(data.session));
  write_text_file(bundle_dir / kLandmarkFile,
                  format_landmarks(header_for(data.session), data.frames));
  write_text_file(bundle_dir / kDiarizationFile, format_diarization(data.segments));
}

}  // namespace roundtable::io
