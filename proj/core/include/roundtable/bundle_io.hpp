#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roundtable/model.hpp"

namespace roundtable::io {

inline constexpr std::string_view kLayoutFile = "layout.json";
inline constexpr std::string_view kLandmarkFile = "landmarks.csv";
inline constexpr std::string_view kDiarizationFile = "diarization.json";
inline constexpr std::string_view kCorrectionsFile = "corrections.txt";

inline constexpr std::string_view kLayoutFormat = "roundtable-layout/1";
inline constexpr std::string_view kLandmarkFormat = "roundtable-landmarks/1";

struct LoadOptions {
  /// Replaces the fps declared in the landmark header.
  std::optional<double> fps_override;
  double min_seat_separation_deg = kDefaultMinSeatSeparationDeg;
};

/// Values declared on the first line of a landmark file.
struct LandmarkHeader {
  double fps = 30.0;
  int hemisphere_width_px = 0;
  int hemisphere_height_px = 0;
  double vertical_fov_deg = 0.0;
};

struct LandmarkTrack {
  LandmarkHeader header;
  std::vector<LandmarkFrame> frames;
};

/// Session fields from the layout document. fps is left at its default;
/// the landmark header supplies it.
Session parse_layout(std::string_view json_text, const std::string& source);
std::string format_layout(const Session& session);

LandmarkTrack parse_landmarks(std::istream& in, const std::string& source);
std::string format_landmarks(const LandmarkHeader& header,
                             const std::vector<LandmarkFrame>& frames);

/// Reads `{"segments": [{"speaker", "start", "end", "text"?}]}`. Segments
/// are returned in file order, not normalized.
std::vector<SpeechSegment> parse_diarization(std::string_view json_text,
                                             const std::string& source);
std::string format_diarization(const std::vector<SpeechSegment>& segments);

/// Cross-file validation shared by the directory loader and in-memory
/// round trips. Frames are sorted by (frame_idx, seat order).
SessionData assemble_session(Session layout, LandmarkTrack track,
                             std::vector<SpeechSegment> segments, const LoadOptions& options,
                             const std::string& source);

/// Loads layout.json, landmarks.csv and diarization.json from a bundle
/// directory. Throws SchemaError / ValidationError.
SessionData load_session(const std::filesystem::path& bundle_dir,
                         const LoadOptions& options = {});

/// Writes the canonical form of `data` into `bundle_dir`.
void save_session(const SessionData& data, const std::filesystem::path& bundle_dir);

LandmarkHeader header_for(const Session& session);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Comma split without quoting; fields are trimmed of surrounding blanks.
std::vector<std::string> split_csv_line(std::string_view line);
/// Strict numeric parse; throws SchemaError naming `field`.
double parse_double(std::string_view text, const std::string& source, int line,
                    std::string_view field);
int parse_int(std::string_view text, const std::string& source, int line,
              std::string_view field);

}  // namespace roundtable::io
