#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "roundtable/attention.hpp"
#include "roundtable/model.hpp"

namespace roundtable {

using SeatArray = std::array<double, kParticipantsPerSession>;
using PairFrames = std::array<std::array<std::int64_t, kParticipantsPerSession>,
                              kParticipantsPerSession>;

/// Sample (n - 1) standard deviation.
double sample_sd(const SeatArray& values);

struct SpeakingStats {
  SeatArray per_participant_s{};
  double tst_s = 0.0;
  double ast_s = 0.0;
  double stsd_s = 0.0;
};

/// Segments must be normalized. Throws ValidationError for unknown speakers.
SpeakingStats speaking_time(const std::vector<SpeechSegment>& segments,
                            const SeatingLayout& layout);

struct AttentionStats {
  /// observer x target, diagonal zero.
  PairFrames pair_frames{};
  SeatArray per_participant_attention_s{};
  double tat_s = 0.0;
  double aat_s = 0.0;
  double atsd_s = 0.0;
};

/// Frame k spans [k / fps, (k + 1) / fps). A record with target T counts
/// iff that span lies inside T's speech (the union of T's segments, each
/// closed-open); attention(o -> T) <= speaking(T) follows. Only
/// Participant targets count. Records may arrive in any order; a forward
/// cursor per speaker is used while they are sorted and a binary search
/// otherwise.
AttentionStats attention_during_speech(const std::vector<AttentionRecord>& records,
                                       const std::vector<SpeechSegment>& segments,
                                       const SeatingLayout& layout, double fps);

/// Fills the derived seconds and aggregates from pair_frames.
void finalize_attention(AttentionStats& stats, double fps);

struct SessionMetrics {
  int group_id = 0;
  Condition condition = Condition::kNoCoordination;
  double duration_s = 0.0;
  double fps = 0.0;
  int frame_count = 0;
  std::vector<std::string> participants;
  SpeakingStats speaking;
  AttentionStats attention;
  std::int64_t reading_frames = 0;
  std::int64_t unfocused_frames = 0;
};

SessionMetrics compute_session_metrics(const Session& session,
                                       const std::vector<AttentionRecord>& records,
                                       const std::vector<SpeechSegment>& segments);

std::string format_session_metrics(const SessionMetrics& metrics);
SessionMetrics parse_session_metrics(std::string_view json_text, const std::string& source);

/// Header row `observer,<ids...>`, then one row per observer.
std::string format_attention_matrix(const AttentionStats& stats, const SeatingLayout& layout);

/// `group_id,condition,TST,AST,STSD,TAT,AAT,ATSD`, sorted by (group, condition).
struct MetricsRow {
  int group_id = 0;
  Condition condition = Condition::kNoCoordination;
  double tst = 0.0, ast = 0.0, stsd = 0.0, tat = 0.0, aat = 0.0, atsd = 0.0;
};
MetricsRow metrics_row(const SessionMetrics& metrics);
std::string format_metrics_csv(std::vector<MetricsRow> rows);
std::vector<MetricsRow> parse_metrics_csv(std::istream& in, const std::string& source);

}  // namespace roundtable
