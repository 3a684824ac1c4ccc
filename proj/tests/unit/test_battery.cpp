#include <algorithm>

#include <gtest/gtest.h>

#include "roundtable/battery.hpp"
#include "test_support.hpp"

namespace roundtable {
namespace {

using testing::Gen;

std::vector<MetricsRow> random_rows(Gen& g, int groups) {
  std::vector<MetricsRow> rows;
  for (int id = 1; id <= groups; ++id) {
    for (Condition c : {Condition::kNoCoordination, Condition::kPlanningPoker}) {
      MetricsRow r;
      r.group_id = id;
      r.condition = c;
      r.tst = g.uniform(300, 700);
      r.ast = r.tst / 4.0;
      r.stsd = g.uniform(20, 80);
      r.tat = g.uniform(100, 400);
      r.aat = r.tat / 4.0;
      r.atsd = g.uniform(10, 60);
      rows.push_back(r);
    }
  }
  return rows;
}

const StatReport& report_for(const BatteryResult& r, Metric m) {
  return *std::find_if(r.reports.begin(), r.reports.end(),
                       [&](const StatReport& s) { return s.metric == m; });
}

TEST(Battery, TotalAndAveragePValuesAreIdentical) {
  Gen g(501);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = random_rows(g, g.integer(4, 14));
    for (PairedMode mode : {PairedMode::kNo, PairedMode::kYes, PairedMode::kBoth}) {
      BatteryOptions opt;
      opt.paired = mode;
      const auto res = run_battery(rows, {}, opt);
      EXPECT_EQ(report_for(res, Metric::kTST).t_p(mode), report_for(res, Metric::kAST).t_p(mode));
      EXPECT_EQ(report_for(res, Metric::kTAT).t_p(mode), report_for(res, Metric::kAAT).t_p(mode));
    }
  }
}

std::vector<MetricsRow> group10_fixture() {
  Gen g(502);
  auto rows = random_rows(g, 12);
  for (auto& r : rows) {
    if (r.group_id == 10 && r.condition == Condition::kNoCoordination) r.stsd = 400.0;
  }
  return rows;
}

TEST(Battery, OutlierGroupExcludedFromBothConditions) {
  const auto res = run_battery(group10_fixture(), {});
  const StatReport& stsd = report_for(res, Metric::kSTSD);
  EXPECT_EQ(stsd.outliers, std::vector<int>{10});
  for (Metric m : {Metric::kTST, Metric::kAST, Metric::kSTSD}) {
    const StatReport& r = report_for(res, m);
    EXPECT_EQ(r.excluded, std::vector<int>{10});
    EXPECT_EQ(std::count(r.group_ids.begin(), r.group_ids.end(), 10), 0);
    EXPECT_EQ(r.values_a.size(), r.values_b.size());
    EXPECT_EQ(r.values_a.size(), 11u);
  }
  const StatReport& tat = report_for(res, Metric::kTAT);
  EXPECT_EQ(std::count(tat.group_ids.begin(), tat.group_ids.end(), 10), 1);
  EXPECT_TRUE(std::any_of(res.log.begin(), res.log.end(), [](const std::string& l) {
    return l.find("STSD condition A: group 10") != std::string::npos;
  }));
  EXPECT_TRUE(std::any_of(res.log.begin(), res.log.end(), [](const std::string& l) {
    return l == "group 10 excluded from speaking metrics";
  }));
}

TEST(Battery, OutlierKeptWhenExclusionDisabled) {
  BatteryOptions opt;
  opt.exclude_outliers = false;
  const auto res = run_battery(group10_fixture(), {}, opt);
  const StatReport& stsd = report_for(res, Metric::kSTSD);
  EXPECT_EQ(stsd.outliers, std::vector<int>{10});
  EXPECT_TRUE(stsd.excluded.empty());
  EXPECT_EQ(stsd.group_ids.size(), 12u);
}

TEST(Battery, RegistryExclusionAndMissingCondition) {
  Gen g(503);
  auto rows = random_rows(g, 8);
  rows.erase(std::remove_if(rows.begin(), rows.end(), [](const MetricsRow& r) {
               return r.group_id == 3 && r.condition == Condition::kPlanningPoker;
             }),
             rows.end());
  const auto res = run_battery(rows, {5});
  for (const auto& r : res.reports) {
    EXPECT_EQ(std::count(r.group_ids.begin(), r.group_ids.end(), 3), 0);
    EXPECT_EQ(std::count(r.group_ids.begin(), r.group_ids.end(), 5), 0);
  }
}

TEST(Battery, AllEqualDataSurfacesErrorsPerMetric) {
  std::vector<MetricsRow> rows;
  for (int id = 1; id <= 6; ++id) {
    for (Condition c : {Condition::kNoCoordination, Condition::kPlanningPoker}) {
      rows.push_back({id, c, 100, 25, 5, 50, 12.5, 3});
    }
  }
  const auto res = run_battery(rows, {});
  ASSERT_EQ(res.reports.size(), kAllMetrics.size());
  for (const auto& r : res.reports) {
    EXPECT_FALSE(r.errors.empty()) << to_string(r.metric);
    EXPECT_FALSE(r.significant);
  }
}

TEST(Battery, FormatsAreStable) {
  const auto res = run_battery(group10_fixture(), {});
  EXPECT_EQ(format_stats_json(res), format_stats_json(run_battery(group10_fixture(), {})));
  const std::string text = format_stats_text(res);
  EXPECT_NE(text.find("Variable"), std::string::npos);
  EXPECT_NE(text.find("Shapiro-Wilk A"), std::string::npos);
  EXPECT_NE(text.find("Levene"), std::string::npos);
  EXPECT_NE(text.find("Cohen's d"), std::string::npos);
}

TEST(Battery, PairedModeStrings) {
  EXPECT_EQ(paired_mode_from_string("both"), PairedMode::kBoth);
  EXPECT_EQ(to_string(PairedMode::kYes), "yes");
  EXPECT_ANY_THROW(paired_mode_from_string("maybe"));
}

}  // namespace
}  // namespace roundtable
