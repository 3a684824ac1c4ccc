#include "roundtable/battery.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "roundtable/errors.hpp"

namespace roundtable {

namespace {

using nlohmann::ordered_json;

constexpr double kPrerequisiteAlpha = 0.05;

ordered_json test_json(const std::optional<TestResult>& r, const char* stat_name) {
  if (!r) return nullptr;
  return {{stat_name, r->statistic}, {"p", r->p}};
}

std::string fixed_or_dash(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("-");
}

std::optional<double> p_of(const std::optional<TestResult>& r) {
  if (!r) return std::nullopt;
  return r->p;
}

template <typename F>
void attempt(StatReport& report, std::string_view step, F&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report.errors.push_back(fmt::format("{}: {}: {}", to_string(report.metric), step, e.what()));
  }
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kTST:
      return "TST";
    case Metric::kAST:
      return "AST";
    case Metric::kSTSD:
      return "STSD";
    case Metric::kTAT:
      return "TAT";
    case Metric::kAAT:
      return "AAT";
    case Metric::kATSD:
      return "ATSD";
  }
  return "?";
}

MetricFamily family_of(Metric metric) {
  switch (metric) {
    case Metric::kTST:
    case Metric::kAST:
    case Metric::kSTSD:
      return MetricFamily::kSpeaking;
    default:
      return MetricFamily::kAttention;
  }
}

double metric_value(const MetricsRow& row, Metric metric) {
  switch (metric) {
    case Metric::kTST:
      return row.tst;
    case Metric::kAST:
      return row.ast;
    case Metric::kSTSD:
      return row.stsd;
    case Metric::kTAT:
      return row.tat;
    case Metric::kAAT:
      return row.aat;
    case Metric::kATSD:
      return row.atsd;
  }
  return 0.0;
}

PairedMode paired_mode_from_string(std::string_view text) {
  if (text == "no") return PairedMode::kNo;
  if (text == "yes") return PairedMode::kYes;
  if (text == "both") return PairedMode::kBoth;
  throw ValidationError(fmt::format("paired mode must be no, yes or both (got '{}')", text));
}

std::string_view to_string(PairedMode mode) {
  switch (mode) {
    case PairedMode::kNo:
      return "no";
    case PairedMode::kYes:
      return "yes";
    case PairedMode::kBoth:
      return "both";
  }
  return "no";
}

std::optional<double> StatReport::t_p(PairedMode mode) const {
  return p_of(mode == PairedMode::kYes ? t_paired : t_independent);
}

StatReport test_metric(Metric metric, const std::vector<int>& group_ids,
                       const std::vector<double>& a, const std::vector<double>& b,
                       const BatteryOptions& options) {
  StatReport r;
  r.metric = metric;
  r.group_ids = group_ids;
  r.values_a = a;
  r.values_b = b;
  attempt(r, "shapiro_wilk A", [&] { r.shapiro_a = shapiro_wilk(a); });
  attempt(r, "shapiro_wilk B", [&] { r.shapiro_b = shapiro_wilk(b); });
  attempt(r, "levene", [&] { r.levene = levene(a, b); });
  if (options.paired != PairedMode::kYes) {
    attempt(r, "t_test", [&] { r.t_independent = t_test(a, b, false); });
  }
  if (options.paired != PairedMode::kNo) {
    attempt(r, "paired t_test", [&] { r.t_paired = t_test(a, b, true); });
  }
  attempt(r, "cohens_d", [&] {
    r.cohens_d = cohens_d(a, b);
    r.effect = effect_label(*r.cohens_d);
  });
  r.prerequisites_met = r.shapiro_a && r.shapiro_b && r.levene &&
                        r.shapiro_a->p > kPrerequisiteAlpha && r.shapiro_b->p > kPrerequisiteAlpha &&
                        r.levene->p > kPrerequisiteAlpha;
  const auto p = r.t_p(options.paired);
  r.significant = p && *p <= options.alpha;
  return r;
}

BatteryResult run_battery(const std::vector<MetricsRow>& rows, const std::set<int>& excluded_groups,
                          const BatteryOptions& options) {
  BatteryResult out;
  out.options = options;

  std::map<int, std::array<const MetricsRow*, 2>> by_group;
  for (const auto& row : rows) {
    auto& slot = by_group[row.group_id][row.condition == Condition::kNoCoordination ? 0 : 1];
    if (slot) {
      throw ValidationError(fmt::format("group {} has two rows for condition {}", row.group_id,
                                        to_string(row.condition)));
    }
    slot = &row;
  }
  std::vector<int> groups;
  for (const auto& [g, pair] : by_group) {
    if (excluded_groups.count(g)) {
      out.log.push_back(fmt::format("group {} excluded by the registry", g));
    } else if (!pair[0] || !pair[1]) {
      out.log.push_back(fmt::format("group {} lacks condition {}; left out of the battery", g,
                                    pair[0] ? "B" : "A"));
    } else {
      groups.push_back(g);
    }
  }

  // Screen every metric per condition on the full eligible set.
  std::map<Metric, std::vector<int>> flagged;
  std::map<MetricFamily, std::set<int>> family_out;
  for (Metric m : kAllMetrics) {
    std::set<int> hits;
    for (int c = 0; c < 2; ++c) {
      std::vector<double> v;
      for (int g : groups) v.push_back(metric_value(*by_group[g][c], m));
      if (v.size() < 4) {
        out.log.push_back(fmt::format("{} condition {}: fewer than 4 groups, IQR screen skipped",
                                      to_string(m), c == 0 ? "A" : "B"));
        continue;
      }
      const auto screen = iqr_screen(v, groups);
      for (int g : screen.outliers) {
        hits.insert(g);
        out.log.push_back(fmt::format(
            "{} condition {}: group {} outside [{:.6f}, {:.6f}]", to_string(m), c == 0 ? "A" : "B",
            g, screen.lower_fence, screen.upper_fence));
      }
    }
    flagged[m].assign(hits.begin(), hits.end());
    family_out[family_of(m)].insert(hits.begin(), hits.end());
  }
  if (options.exclude_outliers) {
    for (const auto& [fam, gs] : family_out) {
      for (int g : gs) {
        out.log.push_back(fmt::format("group {} excluded from {} metrics", g,
                                      fam == MetricFamily::kSpeaking ? "speaking" : "attention"));
      }
    }
  }

  for (Metric m : kAllMetrics) {
    const auto& drop = family_out[family_of(m)];
    std::vector<int> used;
    std::vector<double> a;
    std::vector<double> b;
    for (int g : groups) {
      if (options.exclude_outliers && drop.count(g)) continue;
      used.push_back(g);
      a.push_back(metric_value(*by_group[g][0], m));
      b.push_back(metric_value(*by_group[g][1], m));
    }
    StatReport r = test_metric(m, used, a, b, options);
    r.outliers = flagged[m];
    if (options.exclude_outliers) r.excluded.assign(drop.begin(), drop.end());
    out.reports.push_back(std::move(r));
  }
  return out;
}

std::string format_stats_json(const BatteryResult& result) {
  ordered_json reports = ordered_json::array();
  for (const auto& r : result.reports) {
    ordered_json j;
    j["metric"] = to_string(r.metric);
    j["n"] = r.group_ids.size();
    j["group_ids"] = r.group_ids;
    j["values_A"] = r.values_a;
    j["values_B"] = r.values_b;
    j["outliers"] = r.outliers;
    j["excluded"] = r.excluded;
    j["shapiro_A"] = test_json(r.shapiro_a, "W");
    j["shapiro_B"] = test_json(r.shapiro_b, "W");
    j["levene"] = test_json(r.levene, "F");
    j["t_independent"] = test_json(r.t_independent, "t");
    j["t_paired"] = test_json(r.t_paired, "t");
    const auto primary = r.t_p(result.options.paired);
    j["t_p"] = primary ? ordered_json(*primary) : ordered_json(nullptr);
    j["cohens_d"] = r.cohens_d ? ordered_json(*r.cohens_d) : ordered_json(nullptr);
    j["effect_label"] = r.cohens_d ? ordered_json(to_string(r.effect)) : ordered_json(nullptr);
    j["prerequisites_met"] = r.prerequisites_met;
    j["significant"] = r.significant;
    j["errors"] = r.errors;
    reports.push_back(std::move(j));
  }
  ordered_json root;
  root["format"] = "roundtable-stats/1";
  root["alpha"] = result.options.alpha;
  root["paired"] = to_string(result.options.paired);
  root["exclude_outliers"] = result.options.exclude_outliers;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : result.config) config[k] = v;
  root["config"] = std::move(config);
  root["log"] = result.log;
  root["reports"] = std::move(reports);
  return root.dump(2) + "\n";
}

std::string format_stats_text(const BatteryResult& result) {
  const bool both = result.options.paired == PairedMode::kBoth;
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "alpha = {}  paired = {}\n", result.options.alpha,
                 to_string(result.options.paired));
  for (const auto& [k, v] : result.config) fmt::format_to(std::back_inserter(out), "{} = {}\n", k, v);
  fmt::format_to(std::back_inserter(out), "\n");
  fmt::format_to(std::back_inserter(out), "{:<9}{:>14}{:>17}{:>17}{:>12}{:>12}  {:<8}{}\n",
                 "Variable", "p-value (t)", "Shapiro-Wilk A", "Shapiro-Wilk B", "Levene",
                 "Cohen's d", "effect", both ? "  p (paired)" : "");
  for (const auto& r : result.reports) {
    const auto primary = r.t_p(result.options.paired);
    std::string mark = r.significant ? "*" : "";
    fmt::format_to(std::back_inserter(out), "{:<9}{:>14}{:>17}{:>17}{:>12}{:>12}  {:<8}",
                   to_string(r.metric), fixed_or_dash(primary) + mark, fixed_or_dash(p_of(r.shapiro_a)),
                   fixed_or_dash(p_of(r.shapiro_b)), fixed_or_dash(p_of(r.levene)),
                   r.cohens_d ? fmt::format("{:.3f}", *r.cohens_d) : "-",
                   r.cohens_d ? to_string(r.effect) : "-");
    if (both) fmt::format_to(std::back_inserter(out), "  {:>10}", fixed_or_dash(p_of(r.t_paired)));
    fmt::format_to(std::back_inserter(out), "\n");
  }
  fmt::format_to(std::back_inserter(out), "\n* p <= alpha\n");
  bool any_notes = false;
  for (const auto& r : result.reports) {
    if (!r.prerequisites_met && r.errors.empty()) {
      if (!any_notes) fmt::format_to(std::back_inserter(out), "\n");
      any_notes = true;
      fmt::format_to(std::back_inserter(out), "{}: normality or homogeneity prerequisite not met\n",
                     to_string(r.metric));
    }
    for (const auto& e : r.errors) {
      if (!any_notes) fmt::format_to(std::back_inserter(out), "\n");
      any_notes = true;
      fmt::format_to(std::back_inserter(out), "error: {}\n", e);
    }
  }
  if (!result.log.empty()) {
    fmt::format_to(std::back_inserter(out), "\nscreening log:\n");
    for (const auto& l : result.log) fmt::format_to(std::back_inserter(out), "  {}\n", l);
  }
  return fmt::to_string(out);
}

}  // namespace roundtable
