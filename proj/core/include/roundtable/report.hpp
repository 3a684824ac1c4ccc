#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roundtable/alignment.hpp"
#include "roundtable/battery.hpp"

namespace roundtable {

/// One entry of the experiment registry.
struct GroupInfo {
  int group_id = 0;
  int male = 0;
  int female = 0;
  std::string outcome_a;  // complexity level agreed in condition A
  std::string outcome_b;
  /// Participants did not follow the instructions ("*").
  bool excluded = false;
};

struct HeatmapData {
  std::vector<int> groups;  // ascending
  /// Total speaking minutes per group, [A, B]; nullopt when the session is missing.
  std::vector<std::array<std::optional<double>, 2>> minutes;
};

HeatmapData heatmap_data(const std::vector<SessionMetrics>& sessions);
/// `group,A,B`, minutes with two decimals, blank for a missing session.
std::string format_heatmap_csv(const HeatmapData& data);
std::string render_heatmap_svg(const HeatmapData& data);

struct ChordData {
  int group_id = 0;
  Condition condition = Condition::kNoCoordination;
  std::vector<std::string> participants;
  SeatArray speaking_s{};
  struct Ribbon {
    std::size_t from = 0;
    std::size_t to = 0;
    std::int64_t frames = 0;
    double attention_s = 0.0;
  };
  std::vector<Ribbon> ribbons;  // nonzero only, (from, to) order
};

ChordData chord_data(const SessionMetrics& metrics);
std::string format_chord_json(const ChordData& data);
/// Arc length proportional to speaking time, ribbon width proportional to
/// attention time, arrowheads on the attended participant.
std::string render_chord_svg(const ChordData& data);

/// Rows for every registry group (plus groups only seen in `sessions`),
/// ascending. Markers: "*" registry exclusion, "**" statistical outlier.
std::string format_experiment_table(const std::vector<GroupInfo>& registry,
                                    const std::vector<SessionMetrics>& sessions,
                                    const std::vector<int>& outlier_groups);

/// Groups the battery dropped as outliers (or merely flagged, when
/// exclusion is off).
std::vector<int> outlier_groups(const BatteryResult& result);

struct ReportInputs {
  std::vector<SessionMetrics> sessions;
  std::vector<GroupInfo> registry;
  std::optional<BatteryResult> stats;
};

/// Writes heatmap.{csv,svg}, group<id>_<cond>_chord.{json,svg},
/// experiment_table.csv and, when stats are present, stats.{json,txt}
/// into `dir`.
void emit_report(const std::filesystem::path& dir, const ReportInputs& inputs);

}  // namespace roundtable
