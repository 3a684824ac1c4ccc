#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "roundtable/alignment.hpp"
#include "roundtable/errors.hpp"
#include "test_support.hpp"

namespace roundtable {
namespace {

using testing::Gen;
using testing::square_session;

SpeechSegment seg(const std::string& who, double a, double b) { return {who, a, b, std::nullopt}; }

TEST(SpeakingTime, TwoSpeakers) {
  const Session s = square_session();
  const auto st = speaking_time({seg("P1", 0, 60), seg("P2", 60, 120)}, s.layout);
  EXPECT_DOUBLE_EQ(st.per_participant_s[0], 60);
  EXPECT_DOUBLE_EQ(st.per_participant_s[1], 60);
  EXPECT_DOUBLE_EQ(st.per_participant_s[2], 0);
  EXPECT_DOUBLE_EQ(st.per_participant_s[3], 0);
  EXPECT_DOUBLE_EQ(st.tst_s, 120);
  EXPECT_DOUBLE_EQ(st.ast_s, 30);
  EXPECT_NEAR(st.stsd_s, 34.641, 5e-4);
  EXPECT_NEAR(st.stsd_s, std::sqrt(1200.0), 1e-12);
}

TEST(SpeakingTime, EqualSpeakersHaveZeroSd) {
  const Session s = square_session();
  const auto st = speaking_time(
      {seg("P1", 0, 30), seg("P2", 30, 60), seg("P3", 60, 90), seg("P4", 90, 120)}, s.layout);
  EXPECT_DOUBLE_EQ(st.stsd_s, 0.0);
}

TEST(SpeakingTime, EmptyDiarization) {
  const auto st = speaking_time({}, square_session().layout);
  EXPECT_EQ(st.tst_s, 0.0);
  EXPECT_EQ(st.ast_s, 0.0);
  EXPECT_EQ(st.stsd_s, 0.0);
}

TEST(NormalizeSegments, MergesOverlapWithWarning) {
  std::vector<std::string> warnings;
  const auto out = normalize_segments({seg("P1", 0, 2), seg("P1", 1, 3)}, &warnings);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].start_s, 0.0);
  EXPECT_EQ(out[0].end_s, 3.0);
  EXPECT_EQ(warnings.size(), 1u);
}

std::vector<AttentionRecord> constant_gaze(std::size_t observer, AttentionTarget t, int first,
                                           int last) {
  std::vector<AttentionRecord> out;
  for (int f = first; f <= last; ++f) out.push_back({f, observer, t});
  return out;
}

TEST(AttentionWindow, HalfOverlap) {
  const Session s = square_session();
  const auto recs = constant_gaze(1, AttentionTarget::participant(0), 0, 299);
  const auto st = attention_during_speech(recs, {seg("P1", 0, 5)}, s.layout, 30.0);
  EXPECT_EQ(st.pair_frames[1][0], 150);
  EXPECT_DOUBLE_EQ(st.per_participant_attention_s[1], 5.0);
}

TEST(AttentionWindow, SilentTargetCountsNothing) {
  const Session s = square_session();
  const auto recs = constant_gaze(1, AttentionTarget::participant(2), 0, 299);
  const auto st = attention_during_speech(recs, {seg("P1", 0, 5)}, s.layout, 30.0);
  EXPECT_EQ(st.pair_frames[1][2], 0);
  EXPECT_EQ(st.tat_s, 0.0);
}

TEST(AttentionWindow, ReadingDuringSpeechCountsNothing) {
  const Session s = square_session();
  auto recs = constant_gaze(1, AttentionTarget::reading(), 0, 299);
  const auto more = constant_gaze(2, AttentionTarget::unfocused(), 0, 299);
  recs.insert(recs.end(), more.begin(), more.end());
  const auto st = attention_during_speech(recs, {seg("P1", 0, 10)}, s.layout, 30.0);
  EXPECT_EQ(st.tat_s, 0.0);
}

// Independent recount: a frame span counts iff every elementary piece
// between consecutive segment end points lies inside some segment.
PairFrames brute_force(const std::vector<AttentionRecord>& recs,
                       const std::vector<SpeechSegment>& segs, const SeatingLayout& layout,
                       double fps) {
  PairFrames out{};
  for (const auto& r : recs) {
    if (!r.target.is_participant()) continue;
    const std::string& who = layout.seats[r.target.seat].id;
    const double t0 = r.frame_idx / fps;
    const double t1 = (r.frame_idx + 1) / fps;
    std::set<double> cuts{t0, t1};
    for (const auto& s : segs) {
      if (s.speaker != who) continue;
      if (s.start_s > t0 && s.start_s < t1) cuts.insert(s.start_s);
      if (s.end_s > t0 && s.end_s < t1) cuts.insert(s.end_s);
    }
    bool inside = true;
    for (auto it = cuts.begin(); std::next(it) != cuts.end() && inside; ++it) {
      const double lo = *it;
      const double hi = *std::next(it);
      inside = std::any_of(segs.begin(), segs.end(), [&](const SpeechSegment& s) {
        return s.speaker == who && s.start_s <= lo && hi <= s.end_s;
      });
    }
    if (inside) ++out[r.observer][r.target.seat];
  }
  return out;
}

struct RandomCase {
  std::vector<AttentionRecord> records;
  std::vector<SpeechSegment> segments;
};

RandomCase random_case(Gen& g, double fps, int frames, double grid) {
  RandomCase c;
  const std::array<std::string, 4> ids{"P1", "P2", "P3", "P4"};
  const double duration = frames / fps;
  for (const auto& id : ids) {
    double t = g.integer(0, 20) * grid;
    while (t < duration) {
      const double len = g.integer(1, 80) * grid;
      c.segments.push_back(seg(id, t, std::min(duration, t + len)));
      t += len + g.integer(0, 60) * grid;
    }
  }
  for (int f = 0; f < frames; ++f) {
    for (std::size_t o = 0; o < 4; ++o) {
      const int pick = g.integer(0, 5);
      AttentionTarget t = AttentionTarget::unfocused();
      if (pick == 4) t = AttentionTarget::reading();
      if (pick < 4 && static_cast<std::size_t>(pick) != o) {
        t = AttentionTarget::participant(static_cast<std::size_t>(pick));
      }
      if (g.coin(0.97)) c.records.push_back({f, o, t});
    }
  }
  return c;
}

TEST(AttentionProperty, StreamingEqualsBruteForce) {
  Gen g(301);
  const Session s = square_session();
  for (int trial = 0; trial < 40; ++trial) {
    const double fps = trial % 2 == 0 ? 30.0 : 25.0;
    const double grid = trial % 4 < 2 ? 0.001 : 1.0 / fps;
    const auto c = random_case(g, fps, 600, grid);
    const auto st = attention_during_speech(c.records, c.segments, s.layout, fps);
    EXPECT_EQ(st.pair_frames, brute_force(c.records, c.segments, s.layout, fps)) << trial;

    auto shuffled = c.records;
    std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
    EXPECT_EQ(attention_during_speech(shuffled, c.segments, s.layout, fps).pair_frames,
              st.pair_frames);
  }
}

TEST(AttentionProperty, NeverExceedsSpeaking) {
  Gen g(302);
  const Session s = square_session();
  for (int trial = 0; trial < 40; ++trial) {
    const double fps = g.uniform(10, 60);
    const auto c = random_case(g, fps, 500, 0.0137);
    const auto st = attention_during_speech(c.records, c.segments, s.layout, fps);
    const auto sp = speaking_time(normalize_segments(c.segments, nullptr), s.layout);
    for (std::size_t o = 0; o < 4; ++o) {
      for (std::size_t t = 0; t < 4; ++t) {
        EXPECT_LE(st.pair_frames[o][t] / fps, sp.per_participant_s[t] + 1e-9);
      }
    }
  }
}

// Shifting frames and speech by the same whole number of frames leaves every
// count unchanged. fps = 32 and a 1/64 s grid keep every time exact.
TEST(AttentionProperty, ShiftInvariance) {
  Gen g(303);
  const Session s = square_session();
  const double fps = 32.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_case(g, fps, 400, 1.0 / 64.0);
    const int k = g.integer(1, 500);
    RandomCase shifted = c;
    for (auto& r : shifted.records) r.frame_idx += k;
    for (auto& sg : shifted.segments) {
      sg.start_s += k / fps;
      sg.end_s += k / fps;
    }
    EXPECT_EQ(attention_during_speech(c.records, c.segments, s.layout, fps).pair_frames,
              attention_during_speech(shifted.records, shifted.segments, s.layout, fps).pair_frames);
  }
}

TEST(AttentionProperty, ObserverSwapPermutesMatrix) {
  Gen g(304);
  Session s = square_session();
  const auto c = random_case(g, 30.0, 300, 0.01);
  // Swap the identities of P1 and P3 in the layout; records keep seat indices.
  Session swapped = s;
  std::swap(swapped.layout.seats[0].id, swapped.layout.seats[2].id);
  const auto a = attention_during_speech(c.records, c.segments, s.layout, 30.0);
  auto segs = c.segments;
  for (auto& sg : segs) {
    if (sg.speaker == "P1") {
      sg.speaker = "P3";
    } else if (sg.speaker == "P3") {
      sg.speaker = "P1";
    }
  }
  const auto b = attention_during_speech(c.records, segs, swapped.layout, 30.0);
  EXPECT_EQ(a.pair_frames, b.pair_frames);
}

TEST(SessionMetrics, JsonRoundTrip) {
  Gen g(305);
  Session s = square_session();
  s.duration_s = 10.0;
  const auto c = random_case(g, 30.0, 300, 0.01);
  const SessionMetrics m = compute_session_metrics(s, c.records, c.segments);
  const SessionMetrics back = parse_session_metrics(format_session_metrics(m), "mem");
  EXPECT_EQ(format_session_metrics(back), format_session_metrics(m));
  EXPECT_EQ(back.attention.pair_frames, m.attention.pair_frames);
  EXPECT_EQ(back.speaking.tst_s, m.speaking.tst_s);
  EXPECT_EQ(back.frame_count, 300);
}

TEST(MetricsCsv, RoundTripIsExact) {
  std::vector<MetricsRow> rows = {
      {2, Condition::kPlanningPoker, 0.1 + 0.2, (0.1 + 0.2) / 4, 1.0 / 3.0, 7, 7.0 / 4, 0},
      {1, Condition::kNoCoordination, 480, 120, 3.5, 100.25, 25.0625, 1e-7},
  };
  const std::string text = format_metrics_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), "group_id,condition,TST,AST,STSD,TAT,AAT,ATSD");
  std::istringstream in(text);
  const auto back = parse_metrics_csv(in, "mem");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].group_id, 1);
  EXPECT_EQ(back[1].tst, 0.1 + 0.2);
  EXPECT_EQ(back[1].stsd, 1.0 / 3.0);
  EXPECT_EQ(back[0].atsd, 1e-7);
}

TEST(MetricsCsv, RejectsBadHeader) {
  std::istringstream in("group,condition\n1,A\n");
  EXPECT_THROW(parse_metrics_csv(in, "mem"), SchemaError);
}

}  // namespace
}  // namespace roundtable
