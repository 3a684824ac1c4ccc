#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roundtable/model.hpp"

namespace roundtable {

/// One line of a manual-review patch. Segments are addressed by
/// (speaker, start_s).
struct Correction {
  enum class Kind { kRelabel, kDelete, kRetime };

  Kind kind = Kind::kDelete;
  std::string speaker;
  double start_s = 0.0;
  std::string new_speaker;       // kRelabel
  double new_start_s = 0.0;      // kRetime
  double new_end_s = 0.0;        // kRetime
  int line = 0;
};

/// Parses `RELABEL|DELETE|RETIME, speaker, start_s, [new values]` records.
/// Blank lines and lines starting with '#' are ignored.
std::vector<Correction> parse_corrections(std::istream& in, const std::string& source);

/// Key tolerance when matching a correction's start_s against a segment.
inline constexpr double kCorrectionKeyToleranceS = 1e-6;

/// Applies `patch` to normalized segments and re-normalizes. Throws
/// ValidationError listing every key that matched no segment.
std::vector<SpeechSegment> apply_corrections(const std::vector<SpeechSegment>& segments,
                                             const std::vector<Correction>& patch,
                                             const SeatingLayout& layout,
                                             std::vector<std::string>* warnings = nullptr);

}  // namespace roundtable
