#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "roundtable/distributions.hpp"
#include "roundtable/errors.hpp"
#include "roundtable/stats.hpp"
#include "test_support.hpp"

namespace roundtable {
namespace {

using testing::Gen;

TEST(Quantile, Type7) {
  const std::vector<double> v{1, 2, 3, 4, 100};
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.75), 4.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.5), 3.0);
  const std::vector<double> w{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_type7(w, 0.25), 1.75);
}

TEST(IqrScreen, FlagsFarValue) {
  const std::vector<double> v{1, 2, 3, 4, 100};
  const std::vector<int> ids{1, 2, 3, 4, 5};
  const IqrScreen s = iqr_screen(v, ids);
  EXPECT_DOUBLE_EQ(s.q1, 2.0);
  EXPECT_DOUBLE_EQ(s.q3, 4.0);
  EXPECT_DOUBLE_EQ(s.iqr, 2.0);
  EXPECT_DOUBLE_EQ(s.upper_fence, 7.0);
  EXPECT_EQ(s.outliers, std::vector<int>{5});
}

TEST(IqrScreen, ConstantAndSymmetricHaveNoOutliers) {
  const std::vector<int> ids{1, 2, 3, 4, 5, 6};
  EXPECT_TRUE(iqr_outliers(std::vector<double>{3, 3, 3, 3, 3, 3}, ids).empty());
  EXPECT_TRUE(iqr_outliers(std::vector<double>{-3, -1, 0, 0, 1, 3}, ids).empty());
}

TEST(ShapiroWilk, TextbookHeights) {
  const std::vector<double> x{148, 154, 158, 160, 161, 162, 166, 170, 182};
  const TestResult r = shapiro_wilk(x);
  EXPECT_NEAR(r.statistic, 0.9576941816027082, 1e-9);
  EXPECT_NEAR(r.p, 0.773903462518157, 1e-7);
}

TEST(ShapiroWilk, NormalQuantileSequence) {
  std::vector<double> q;
  for (int i = 1; i <= 20; ++i) q.push_back(dist::normal_quantile((i - 0.375) / 20.25));
  EXPECT_GT(shapiro_wilk(q).p, 0.99);
}

TEST(ShapiroWilk, ConstantIsDegenerate) {
  EXPECT_THROW(shapiro_wilk(std::vector<double>{1, 1, 1, 1, 1}), DegenerateError);
}

TEST(ShapiroWilk, ScaleAndShiftInvariant) {
  Gen g(401);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x;
    const int n = g.integer(3, 40);
    for (int i = 0; i < n; ++i) x.push_back(g.normal(0, 1));
    const double scale = g.uniform(0.01, 100);
    const double shift = g.uniform(-1000, 1000);
    std::vector<double> y;
    for (double v : x) y.push_back(v * scale + shift);
    const TestResult a = shapiro_wilk(x);
    const TestResult b = shapiro_wilk(y);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-9);
    EXPECT_NEAR(a.p, b.p, 1e-8);
  }
}

TEST(Levene, ShiftedCopyHasNoEvidence) {
  const std::vector<double> a{1, 4, 2, 8, 5};
  std::vector<double> b;
  for (double v : a) b.push_back(v + 10.3);
  const TestResult r = levene(a, b);
  EXPECT_NEAR(r.statistic, 0.0, 1e-9);
  EXPECT_NEAR(r.p, 1.0, 1e-9);
}

TEST(Levene, SpreadDifference) {
  const TestResult r = levene(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 20, 30, 40});
  EXPECT_NEAR(r.statistic, 9.623762376237623, 1e-9);
  EXPECT_NEAR(r.p, 0.021056767112156507, 1e-9);
}

TEST(Levene, LocationInvariant) {
  Gen g(402);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a, b, b2;
    for (int i = 0; i < 12; ++i) a.push_back(g.normal(0, 1));
    for (int i = 0; i < 9; ++i) b.push_back(g.normal(0, 1));
    const double shift = g.uniform(-50, 50);
    for (double v : b) b2.push_back(v + shift);
    EXPECT_NEAR(levene(a, b).statistic, levene(a, b2).statistic, 1e-8);
  }
}

TEST(TTest, IdenticalSamples) {
  const std::vector<double> a{3, 1, 4, 1, 5};
  const TestResult r = t_test(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p, 1.0);
}

TEST(TTest, PairedZeroVarianceDifferences) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_THROW(t_test(a, a, true), DegenerateError);
}

TEST(TTest, SwapNegatesStatistic) {
  Gen g(403);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 10; ++i) a.push_back(g.normal(0, 1));
    for (int i = 0; i < 10; ++i) b.push_back(g.normal(0.5, 2));
    for (bool paired : {false, true}) {
      const TestResult ab = t_test(a, b, paired);
      const TestResult ba = t_test(b, a, paired);
      EXPECT_NEAR(ab.statistic, -ba.statistic, 1e-12);
      EXPECT_NEAR(ab.p, ba.p, 1e-14);
    }
  }
}

TEST(TTest, ScaleInvariantP) {
  Gen g(404);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a, b, a4, b4;
    for (int i = 0; i < 8; ++i) a.push_back(g.uniform(100, 900));
    for (int i = 0; i < 8; ++i) b.push_back(g.uniform(100, 900));
    const double k = g.uniform(0.1, 10);
    for (double v : a) a4.push_back(v * k);
    for (double v : b) b4.push_back(v * k);
    EXPECT_NEAR(t_test(a, b).p, t_test(a4, b4).p, 1e-12);
  }
}

TEST(CohensD, UnitGap) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{2, 3, 4};
  EXPECT_DOUBLE_EQ(cohens_d(b, a), 1.0);
  EXPECT_EQ(effect_label(cohens_d(b, a)), EffectLabel::kLarge);
}

TEST(CohensD, IdenticalSamples) {
  const std::vector<double> a{1, 5, 2};
  EXPECT_EQ(cohens_d(a, a), 0.0);
  EXPECT_EQ(effect_label(0.0), EffectLabel::kNone);
}

TEST(CohensD, Labels) {
  EXPECT_EQ(effect_label(0.19), EffectLabel::kNone);
  EXPECT_EQ(effect_label(0.2), EffectLabel::kSmall);
  EXPECT_EQ(effect_label(-0.5), EffectLabel::kMedium);
  EXPECT_EQ(effect_label(0.61), EffectLabel::kMedium);
  EXPECT_EQ(effect_label(0.8), EffectLabel::kLarge);
  EXPECT_EQ(to_string(EffectLabel::kMedium), "medium");
}

class StatsOracle : public ::testing::TestWithParam<std::string> {};

nlohmann::json& oracle() {
  static nlohmann::json doc = [] {
    std::ifstream in(testing::test_data("stats_battery.json"));
    return nlohmann::json::parse(in);
  }();
  return doc;
}

std::vector<std::string> oracle_case_names() {
  std::vector<std::string> out;
  for (const auto& c : oracle()["cases"]) out.push_back(c["name"]);
  return out;
}

void expect_pair(const TestResult& got, const nlohmann::json& ref, double tol, const std::string& what) {
  EXPECT_NEAR(got.statistic, ref[0].get<double>(), tol) << what << " statistic";
  EXPECT_NEAR(got.p, ref[1].get<double>(), tol) << what << " p";
}

TEST_P(StatsOracle, AgreesWithBothReferences) {
  const auto& cases = oracle()["cases"];
  const auto it = std::find_if(cases.begin(), cases.end(),
                               [&](const auto& c) { return c["name"] == GetParam(); });
  ASSERT_NE(it, cases.end());
  const auto a = (*it)["a"].get<std::vector<double>>();
  const auto b = (*it)["b"].get<std::vector<double>>();
  for (const char* ref : {"scipy", "mpmath"}) {
    const auto& r = (*it)[ref];
    expect_pair(shapiro_wilk(a), r["shapiro_A"], 1e-6, std::string(ref) + " shapiro A");
    expect_pair(shapiro_wilk(b), r["shapiro_B"], 1e-6, std::string(ref) + " shapiro B");
    expect_pair(levene(a, b), r["levene"], 1e-6, std::string(ref) + " levene");
    expect_pair(t_test(a, b), r["t_ind"], 1e-9, std::string(ref) + " t");
    if (r.contains("t_paired")) expect_pair(t_test(a, b, true), r["t_paired"], 1e-9, std::string(ref) + " paired t");
    EXPECT_NEAR(cohens_d(a, b), r["cohens_d"].get<double>(), 1e-9) << ref << " d";
  }
}

INSTANTIATE_TEST_SUITE_P(Battery, StatsOracle, ::testing::ValuesIn(oracle_case_names()),
                         [](const auto& info) { return info.param; });

}  // namespace
}  // namespace roundtable
