#include "roundtable/corrections.hpp"

#include <cmath>
#include <istream>

#include <fmt/format.h>

#include "roundtable/bundle_io.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

std::vector<Correction> parse_corrections(std::istream& in, const std::string& source) {
  std::vector<Correction> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto f = io::split_csv_line(line);
    Correction c;
    c.line = lineno;
    auto want = [&](std::size_t n) {
      if (f.size() != n) {
        throw SchemaError(source, lineno,
                          fmt::format("{} takes {} fields, got {}", f[0], n, f.size()));
      }
    };
    if (f[0] == "RELABEL") {
      want(4);
      c.kind = Correction::Kind::kRelabel;
      c.new_speaker = f[3];
    } else if (f[0] == "DELETE") {
      want(3);
      c.kind = Correction::Kind::kDelete;
    } else if (f[0] == "RETIME") {
      want(5);
      c.kind = Correction::Kind::kRetime;
      c.new_start_s = io::parse_double(f[3], source, lineno, "new_start_s");
      c.new_end_s = io::parse_double(f[4], source, lineno, "new_end_s");
      if (!(c.new_start_s < c.new_end_s) || c.new_start_s < 0.0) {
        throw SchemaError(source, lineno, "RETIME needs 0 <= new_start < new_end");
      }
    } else {
      throw SchemaError(source, lineno,
                        fmt::format("unknown correction '{}' (RELABEL, DELETE, RETIME)", f[0]));
    }
    c.speaker = f[1];
    c.start_s = io::parse_double(f[2], source, lineno, "start_s");
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SpeechSegment> apply_corrections(const std::vector<SpeechSegment>& segments,
                                             const std::vector<Correction>& patch,
                                             const SeatingLayout& layout,
                                             std::vector<std::string>* warnings) {
  if (patch.empty()) return segments;

  std::vector<SpeechSegment> work = segments;
  std::vector<bool> deleted(work.size(), false);
  std::vector<std::string> unmatched;

  for (const auto& c : patch) {
    // Keys refer to the segment set before any correction is applied.
    std::size_t hit = segments.size();
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].speaker == c.speaker &&
          std::abs(segments[i].start_s - c.start_s) <= kCorrectionKeyToleranceS) {
        hit = i;
        break;
      }
    }
    if (hit == segments.size() || deleted[hit]) {
      unmatched.push_back(fmt::format("({}, {})", c.speaker, c.start_s));
      continue;
    }
    switch (c.kind) {
      case Correction::Kind::kRelabel:
        layout.require_index(c.new_speaker);
        work[hit].speaker = c.new_speaker;
        break;
      case Correction::Kind::kDelete:
        deleted[hit] = true;
        break;
      case Correction::Kind::kRetime:
        work[hit].start_s = c.new_start_s;
        work[hit].end_s = c.new_end_s;
        break;
    }
  }
  if (!unmatched.empty()) {
    throw ValidationError(
        fmt::format("correction keys match no segment: {}", fmt::join(unmatched, ", ")));
  }

  std::vector<SpeechSegment> kept;
  kept.reserve(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!deleted[i]) kept.push_back(std::move(work[i]));
  }
  return normalize_segments(std::move(kept), warnings);
}

}  // namespace roundtable
