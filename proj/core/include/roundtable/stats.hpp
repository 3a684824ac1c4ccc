#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace roundtable {

struct TestResult {
  double statistic = 0.0;
  double p = 1.0;
};

/// Linear interpolation between order statistics (type 7).
double quantile_type7(std::span<const double> sorted, double prob);

struct IqrScreen {
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::vector<int> outliers;  // group ids, input order
};

/// Flags x < Q1 - 1.5 IQR or x > Q3 + 1.5 IQR. Needs at least 4 values.
IqrScreen iqr_screen(std::span<const double> values, std::span<const int> group_ids);
std::vector<int> iqr_outliers(std::span<const double> values, std::span<const int> group_ids);

/// Royston (1995) AS R94. 3 <= n <= 5000; throws DegenerateError
/// ("degenerate sample") for zero range.
TestResult shapiro_wilk(std::span<const double> values);

/// Mean-centred Levene test, F(1, nA + nB - 2) p-value.
TestResult levene(std::span<const double> a, std::span<const double> b);

/// Two-sided Student t. Independent mode pools the variances; paired mode
/// is the one-sample test on a - b.
TestResult t_test(std::span<const double> a, std::span<const double> b, bool paired = false);

/// (mean_a - mean_b) / pooled SD, pooled over nA + nB - 2 degrees of freedom.
double cohens_d(std::span<const double> a, std::span<const double> b);

enum class EffectLabel { kNone, kSmall, kMedium, kLarge };
/// |d| < 0.2 none, < 0.5 small, < 0.8 medium, otherwise large.
EffectLabel effect_label(double d);
std::string_view to_string(EffectLabel label);

}  // namespace roundtable
