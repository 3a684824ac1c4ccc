#include "roundtable/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/bundle_io.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

namespace {

using nlohmann::json;

constexpr std::string_view kMetricsHeader = "group_id,condition,TST,AST,STSD,TAT,AAT,ATSD";
constexpr std::string_view kSessionMetricsFormat = "roundtable-session-metrics/1";

struct Interval {
  double start;
  double end;
};

// Disjoint, sorted intervals per seat.
std::vector<std::vector<Interval>> speech_by_seat(const std::vector<SpeechSegment>& segments,
                                                  const SeatingLayout& layout) {
  std::vector<std::vector<Interval>> out(layout.seats.size());
  for (const auto& s : segments) {
    const auto idx = layout.index_of(s.speaker);
    if (!idx) throw ValidationError(fmt::format("unknown speaker '{}'", s.speaker));
    out[*idx].push_back({s.start_s, s.end_s});
  }
  for (auto& v : out) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
    std::vector<Interval> merged;
    for (const auto& iv : v) {
      if (!merged.empty() && iv.start <= merged.back().end) {
        merged.back().end = std::max(merged.back().end, iv.end);
      } else {
        merged.push_back(iv);
      }
    }
    v = std::move(merged);
  }
  return out;
}

bool covers(const Interval& iv, double t0, double t1) { return iv.start <= t0 && t1 <= iv.end; }

json seat_array_json(const SeatArray& a) { return json(std::vector<double>(a.begin(), a.end())); }

SeatArray seat_array_from(const json& j) {
  SeatArray out{};
  const auto v = j.get<std::vector<double>>();
  if (v.size() != out.size()) throw Error("expected 4 per-participant values");
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

double sample_sd(const SeatArray& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

SpeakingStats speaking_time(const std::vector<SpeechSegment>& segments,
                            const SeatingLayout& layout) {
  SpeakingStats st;
  for (const auto& s : segments) {
    const auto idx = layout.index_of(s.speaker);
    if (!idx) throw ValidationError(fmt::format("unknown speaker '{}'", s.speaker));
    st.per_participant_s.at(*idx) += s.end_s - s.start_s;
  }
  for (double v : st.per_participant_s) st.tst_s += v;
  st.ast_s = st.tst_s / static_cast<double>(kParticipantsPerSession);
  st.stsd_s = sample_sd(st.per_participant_s);
  return st;
}

void finalize_attention(AttentionStats& stats, double fps) {
  stats.tat_s = 0.0;
  for (std::size_t o = 0; o < kParticipantsPerSession; ++o) {
    std::int64_t frames = 0;
    for (std::size_t t = 0; t < kParticipantsPerSession; ++t) frames += stats.pair_frames[o][t];
    stats.per_participant_attention_s[o] = static_cast<double>(frames) / fps;
    stats.tat_s += stats.per_participant_attention_s[o];
  }
  stats.aat_s = stats.tat_s / static_cast<double>(kParticipantsPerSession);
  stats.atsd_s = sample_sd(stats.per_participant_attention_s);
}

AttentionStats attention_during_speech(const std::vector<AttentionRecord>& records,
                                       const std::vector<SpeechSegment>& segments,
                                       const SeatingLayout& layout, double fps) {
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  const auto speech = speech_by_seat(segments, layout);
  std::vector<std::size_t> cursor(speech.size(), 0);
  std::vector<double> last_t(speech.size(), -std::numeric_limits<double>::infinity());

  AttentionStats st;
  for (const auto& r : records) {
    if (!r.target.is_participant()) continue;
    const std::size_t tgt = r.target.seat;
    if (tgt == r.observer || tgt >= speech.size() || r.observer >= speech.size()) continue;
    const auto& ivs = speech[tgt];
    if (ivs.empty()) continue;
    const double t0 = r.frame_idx / fps;
    const double t1 = (r.frame_idx + 1) / fps;
    std::size_t& c = cursor[tgt];
    if (t0 >= last_t[tgt]) {
      while (c < ivs.size() && ivs[c].end <= t0) ++c;
    } else {
      c = static_cast<std::size_t>(
          std::upper_bound(ivs.begin(), ivs.end(), t0,
                           [](double v, const Interval& iv) { return v < iv.end; }) -
          ivs.begin());
    }
    last_t[tgt] = t0;
    if (c < ivs.size() && covers(ivs[c], t0, t1)) ++st.pair_frames[r.observer][tgt];
  }
  finalize_attention(st, fps);
  return st;
}

SessionMetrics compute_session_metrics(const Session& session,
                                       const std::vector<AttentionRecord>& records,
                                       const std::vector<SpeechSegment>& segments) {
  SessionMetrics m;
  m.group_id = session.group_id;
  m.condition = session.condition;
  m.duration_s = session.duration_s;
  m.fps = session.fps;
  m.frame_count = session.frame_count();
  for (const auto& p : session.layout.seats) m.participants.push_back(p.id);
  m.speaking = speaking_time(segments, session.layout);
  m.attention = attention_during_speech(records, segments, session.layout, session.fps);
  for (const auto& r : records) {
    if (r.target.kind == AttentionTarget::Kind::kReading) ++m.reading_frames;
    if (r.target.kind == AttentionTarget::Kind::kUnfocused) ++m.unfocused_frames;
  }
  return m;
}

std::string format_session_metrics(const SessionMetrics& m) {
  json pair = json::array();
  for (const auto& row : m.attention.pair_frames) pair.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  json j = {
      {"format", kSessionMetricsFormat},
      {"group_id", m.group_id},
      {"condition", to_string(m.condition)},
      {"duration_s", m.duration_s},
      {"fps", m.fps},
      {"frame_count", m.frame_count},
      {"participants", m.participants},
      {"speaking",
       {{"per_participant_s", seat_array_json(m.speaking.per_participant_s)},
        {"tst_s", m.speaking.tst_s},
        {"ast_s", m.speaking.ast_s},
        {"stsd_s", m.speaking.stsd_s}}},
      {"attention",
       {{"pair_frames", pair},
        {"per_participant_attention_s", seat_array_json(m.attention.per_participant_attention_s)},
        {"tat_s", m.attention.tat_s},
        {"aat_s", m.attention.aat_s},
        {"atsd_s", m.attention.atsd_s}}},
      {"reading_frames", m.reading_frames},
      {"unfocused_frames", m.unfocused_frames},
  };
  return j.dump(2) + "\n";
}

SessionMetrics parse_session_metrics(std::string_view json_text, const std::string& source) {
  try {
    const json j = json::parse(json_text);
    if (j.at("format") != kSessionMetricsFormat) throw SchemaError(source, 0, "unexpected format tag");
    SessionMetrics m;
    m.group_id = j.at("group_id").get<int>();
    m.condition = condition_from_string(j.at("condition").get<std::string>());
    m.duration_s = j.at("duration_s").get<double>();
    m.fps = j.at("fps").get<double>();
    m.frame_count = j.at("frame_count").get<int>();
    m.participants = j.at("participants").get<std::vector<std::string>>();
    const auto& s = j.at("speaking");
    m.speaking.per_participant_s = seat_array_from(s.at("per_participant_s"));
    m.speaking.tst_s = s.at("tst_s").get<double>();
    m.speaking.ast_s = s.at("ast_s").get<double>();
    m.speaking.stsd_s = s.at("stsd_s").get<double>();
    const auto& a = j.at("attention");
    const auto rows = a.at("pair_frames").get<std::vector<std::vector<std::int64_t>>>();
    if (rows.size() != kParticipantsPerSession) throw SchemaError(source, 0, "pair_frames must be 4x4");
    for (std::size_t o = 0; o < rows.size(); ++o) {
      if (rows[o].size() != kParticipantsPerSession) throw SchemaError(source, 0, "pair_frames must be 4x4");
      std::copy(rows[o].begin(), rows[o].end(), m.attention.pair_frames[o].begin());
    }
    m.attention.per_participant_attention_s = seat_array_from(a.at("per_participant_attention_s"));
    m.attention.tat_s = a.at("tat_s").get<double>();
    m.attention.aat_s = a.at("aat_s").get<double>();
    m.attention.atsd_s = a.at("atsd_s").get<double>();
    m.reading_frames = j.at("reading_frames").get<std::int64_t>();
    m.unfocused_frames = j.at("unfocused_frames").get<std::int64_t>();
    return m;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(source, 0, e.what());
  }
}

std::string format_attention_matrix(const AttentionStats& stats, const SeatingLayout& layout) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "observer");
  for (const auto& p : layout.seats) fmt::format_to(std::back_inserter(out), ",{}", p.id);
  fmt::format_to(std::back_inserter(out), "\n");
  for (std::size_t o = 0; o < layout.seats.size(); ++o) {
    fmt::format_to(std::back_inserter(out), "{}", layout.seats[o].id);
    for (std::size_t t = 0; t < layout.seats.size(); ++t) {
      fmt::format_to(std::back_inserter(out), ",{}", stats.pair_frames[o][t]);
    }
    fmt::format_to(std::back_inserter(out), "\n");
  }
  return fmt::to_string(out);
}

MetricsRow metrics_row(const SessionMetrics& m) {
  return {m.group_id,       m.condition,        m.speaking.tst_s,   m.speaking.ast_s,
          m.speaking.stsd_s, m.attention.tat_s, m.attention.aat_s, m.attention.atsd_s};
}

std::string format_metrics_csv(std::vector<MetricsRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.group_id, a.condition) < std::tie(b.group_id, b.condition);
  });
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "{}\n", kMetricsHeader);
  for (const auto& r : rows) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", r.group_id,
                   to_string(r.condition), r.tst, r.ast, r.stsd, r.tat, r.aat, r.atsd);
  }
  return fmt::to_string(out);
}

std::vector<MetricsRow> parse_metrics_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw SchemaError(source, 1, fmt::format("expected header '{}'", kMetricsHeader));
  }
  std::vector<MetricsRow> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 8) throw SchemaError(source, lineno, "expected 8 fields");
    MetricsRow r;
    r.group_id = io::parse_int(f[0], source, lineno, "group_id");
    try {
      r.condition = condition_from_string(f[1]);
    } catch (const std::exception& e) {
      throw SchemaError(source, lineno, e.what());
    }
    r.tst = io::parse_double(f[2], source, lineno, "TST");
    r.ast = io::parse_double(f[3], source, lineno, "AST");
    r.stsd = io::parse_double(f[4], source, lineno, "STSD");
    r.tat = io::parse_double(f[5], source, lineno, "TAT");
    r.aat = io::parse_double(f[6], source, lineno, "AAT");
    r.atsd = io::parse_double(f[7], source, lineno, "ATSD");
    out.push_back(r);
  }
  return out;
}

}  // namespace roundtable
