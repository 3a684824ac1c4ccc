#include "roundtable/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "roundtable/distributions.hpp"
#include "roundtable/errors.hpp"

namespace roundtable {

namespace {

constexpr double kSmall = 1e-19;

// Royston's polynomial approximations.
constexpr double kG[] = {-2.273, 0.459};
constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[] = {-0.4803, -0.082676, 0.0030302};

template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double r = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
  return r;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sum_sq_dev(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

void require_finite(std::span<const double> v, std::string_view what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(fmt::format("{}: non-finite value", what));
  }
}

}  // namespace

double quantile_type7(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

IqrScreen iqr_screen(std::span<const double> values, std::span<const int> group_ids) {
  if (values.size() != group_ids.size()) throw ValidationError("values and group ids differ in length");
  if (values.size() < 4) throw ValidationError("IQR screening needs at least 4 values");
  require_finite(values, "iqr_outliers");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  IqrScreen s;
  s.q1 = quantile_type7(sorted, 0.25);
  s.q3 = quantile_type7(sorted, 0.75);
  s.iqr = s.q3 - s.q1;
  s.lower_fence = s.q1 - 1.5 * s.iqr;
  s.upper_fence = s.q3 + 1.5 * s.iqr;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < s.lower_fence || values[i] > s.upper_fence) s.outliers.push_back(group_ids[i]);
  }
  return s;
}

std::vector<int> iqr_outliers(std::span<const double> values, std::span<const int> group_ids) {
  return iqr_screen(values, group_ids).outliers;
}

TestResult shapiro_wilk(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 3 || n > 5000) throw ValidationError(fmt::format("shapiro_wilk: n = {} outside [3, 5000]", n));
  require_finite(values, "shapiro_wilk");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() < kSmall) throw DegenerateError("degenerate sample");

  const std::size_t half = n / 2;
  const double an = static_cast<double>(n);
  std::vector<double> a(half + 1, 0.0);  // 1-based
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    std::vector<double> m(half + 1, 0.0);
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= half; ++i) {
      m[i] = dist::normal_quantile((static_cast<double>(i) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(kC1, rsn) - m[1] / ssumm2;
    std::size_t first;
    double fac;
    if (n > 5) {
      const double a2 = -m[2] / ssumm2 + poly(kC2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
      first = 3;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
      first = 2;
    }
    a[1] = a1;
    for (std::size_t i = first; i <= half; ++i) a[i] = -m[i] / fac;
  }

  // Centre and scale before the sums to keep large offsets harmless.
  const double mean = mean_of(x);
  const double range = x.back() - x.front();
  double num = 0.0;
  double asq = 0.0;
  for (std::size_t i = 1; i <= half; ++i) {
    num += a[i] * ((x[n - i] - mean) / range - (x[i - 1] - mean) / range);
    asq += 2.0 * a[i] * a[i];
  }
  double ss = 0.0;
  for (double v : x) ss += ((v - mean) / range) * ((v - mean) / range);
  double w = num * num / (asq * ss);
  w = std::min(w, 1.0);

  TestResult r;
  r.statistic = w;
  if (n == 3) {
    constexpr double kSixOverPi = 6.0 / std::numbers::pi;
    constexpr double kPiOverThree = std::numbers::pi / 3.0;
    r.p = std::max(0.0, kSixOverPi * (std::asin(std::sqrt(w)) - kPiOverThree));
    return r;
  }
  const double w1 = 1.0 - w;
  double y = std::log(w1);
  double mu;
  double sigma;
  if (n <= 11) {
    const double gamma = poly(kG, an);
    if (y >= gamma) {
      r.p = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    mu = poly(kC3, an);
    sigma = std::exp(poly(kC4, an));
  } else {
    const double lx = std::log(an);
    mu = poly(kC5, lx);
    sigma = std::exp(poly(kC6, lx));
  }
  r.p = dist::normal_upper(y, mu, sigma);
  return r;
}

TestResult levene(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("levene: each sample needs at least 2 values");
  require_finite(a, "levene");
  require_finite(b, "levene");
  auto abs_dev = [](std::span<const double> v) {
    const double m = mean_of(v);
    std::vector<double> z;
    z.reserve(v.size());
    for (double x : v) z.push_back(std::abs(x - m));
    return z;
  };
  const auto za = abs_dev(a);
  const auto zb = abs_dev(b);
  const double na = static_cast<double>(za.size());
  const double nb = static_cast<double>(zb.size());
  const double ma = mean_of(za);
  const double mb = mean_of(zb);
  const double grand = (ma * na + mb * nb) / (na + nb);
  const double between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
  const double within = sum_sq_dev(za, ma) + sum_sq_dev(zb, mb);
  double max_z = 0.0;
  for (double z : za) max_z = std::max(max_z, z);
  for (double z : zb) max_z = std::max(max_z, z);
  // Sums of squares below the rounding floor of the deviations count as zero.
  const double zero_floor = (na + nb) * (1e-12 * max_z) * (1e-12 * max_z);
  if (!(within > zero_floor)) {
    if (between > zero_floor) throw DegenerateError("levene: zero within-group spread of deviations");
    auto constant = [](std::span<const double> v) {
      return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    if (constant(a) && constant(b)) {
      throw DegenerateError("degenerate sample: both groups are constant");
    }
    return {0.0, 1.0};
  }
  const double df2 = na + nb - 2.0;
  const double f = df2 * between / within;
  return {f, dist::f_upper(f, 1.0, df2)};
}

TestResult t_test(std::span<const double> a, std::span<const double> b, bool paired) {
  require_finite(a, "t_test");
  require_finite(b, "t_test");
  if (paired) {
    if (a.size() != b.size()) throw ValidationError("paired t-test needs equal lengths");
    if (a.size() < 2) throw ValidationError("paired t-test needs at least 2 pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double m = mean_of(d);
    const double var = sum_sq_dev(d, m) / (static_cast<double>(d.size()) - 1.0);
    if (!(var > 0.0)) throw DegenerateError("degenerate sample: differences have zero variance");
    const double t = m / std::sqrt(var / static_cast<double>(d.size()));
    return {t, dist::student_t_two_sided(t, static_cast<double>(d.size()) - 1.0)};
  }
  if (a.size() < 2 || b.size() < 2) throw ValidationError("t-test needs at least 2 values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double df = na + nb - 2.0;
  const double sp2 = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / df;
  if (!(sp2 > 0.0)) {
    if (ma == mb) return {0.0, 1.0};
    throw DegenerateError("degenerate sample: zero pooled variance");
  }
  const double t = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
  return {t, dist::student_t_two_sided(t, df)};
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("cohens_d needs at least 2 values per sample");
  require_finite(a, "cohens_d");
  require_finite(b, "cohens_d");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double df = static_cast<double>(a.size() + b.size()) - 2.0;
  const double sp = std::sqrt((sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / df);
  if (!(sp > 0.0)) throw DegenerateError("degenerate sample: zero pooled standard deviation");
  return (ma - mb) / sp;
}

EffectLabel effect_label(double d) {
  const double m = std::abs(d);
  if (m < 0.2) return EffectLabel::kNone;
  if (m < 0.5) return EffectLabel::kSmall;
  if (m < 0.8) return EffectLabel::kMedium;
  return EffectLabel::kLarge;
}

std::string_view to_string(EffectLabel label) {
  switch (label) {
    case EffectLabel::kNone:
      return "none";
    case EffectLabel::kSmall:
      return "small";
    case EffectLabel::kMedium:
      return "medium";
    case EffectLabel::kLarge:
      return "large";
  }
  return "none";
}

}  // namespace roundtable
