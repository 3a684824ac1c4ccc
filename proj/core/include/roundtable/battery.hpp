#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "roundtable/alignment.hpp"
#include "roundtable/stats.hpp"

namespace roundtable {

enum class Metric { kTST, kAST, kSTSD, kTAT, kAAT, kATSD };
inline constexpr std::array<Metric, 6> kAllMetrics{Metric::kTST,  Metric::kAST, Metric::kSTSD,
                                                   Metric::kTAT, Metric::kAAT, Metric::kATSD};
std::string_view to_string(Metric metric);

/// Speaking = TST/AST/STSD, attention = TAT/AAT/ATSD.
enum class MetricFamily { kSpeaking, kAttention };
MetricFamily family_of(Metric metric);

double metric_value(const MetricsRow& row, Metric metric);

enum class PairedMode { kNo, kYes, kBoth };
PairedMode paired_mode_from_string(std::string_view text);
std::string_view to_string(PairedMode mode);

struct BatteryOptions {
  double alpha = 0.05;
  PairedMode paired = PairedMode::kNo;
  /// Outliers found in any metric of a family drop that group from every
  /// metric of the family, in both conditions. When false they are only
  /// reported.
  bool exclude_outliers = true;
};

struct StatReport {
  Metric metric = Metric::kTST;
  std::vector<int> group_ids;  // groups entering the tests, ascending
  std::vector<double> values_a;
  std::vector<double> values_b;
  std::vector<int> outliers;  // flagged by this metric's own screen
  std::vector<int> excluded;  // dropped through the family rule
  std::optional<TestResult> shapiro_a;
  std::optional<TestResult> shapiro_b;
  std::optional<TestResult> levene;
  std::optional<TestResult> t_independent;
  std::optional<TestResult> t_paired;
  std::optional<double> cohens_d;
  EffectLabel effect = EffectLabel::kNone;
  bool prerequisites_met = false;
  bool significant = false;
  std::vector<std::string> errors;

  /// p-value of the primary test: paired in kYes mode, independent otherwise.
  std::optional<double> t_p(PairedMode mode) const;
};

struct BatteryResult {
  BatteryOptions options;
  /// Effective run configuration echoed into the reports.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<StatReport> reports;  // kAllMetrics order
  std::vector<std::string> log;
};

/// Runs the screen -> Shapiro-Wilk -> Levene -> t-test -> Cohen's d sequence
/// for every metric. Only groups with both conditions and not listed in
/// `excluded_groups` take part. Per-metric failures land in
/// StatReport::errors; nothing throws for degenerate data.
BatteryResult run_battery(const std::vector<MetricsRow>& rows, const std::set<int>& excluded_groups,
                          const BatteryOptions& options = {});

/// Single-metric core used by run_battery.
StatReport test_metric(Metric metric, const std::vector<int>& group_ids,
                       const std::vector<double>& a, const std::vector<double>& b,
                       const BatteryOptions& options);

std::string format_stats_json(const BatteryResult& result);
/// Aligned text table: Variable, p-value (t), Shapiro-Wilk A, Shapiro-Wilk B,
/// Levene, Cohen's d, effect.
std::string format_stats_text(const BatteryResult& result);

}  // namespace roundtable
