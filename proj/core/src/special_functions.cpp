#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "roundtable/distributions.hpp"

namespace roundtable::dist {

namespace bm = boost::math;

double normal_quantile(double p) { return bm::quantile(bm::normal_distribution<>(0.0, 1.0), p); }

double normal_upper(double z, double mean, double sd) {
  return bm::cdf(bm::complement(bm::normal_distribution<>(mean, sd), z));
}

double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return 2.0 * bm::cdf(bm::complement(bm::students_t_distribution<>(df), std::abs(t)));
}

double f_upper(double f, double d1, double d2) {
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  return bm::cdf(bm::complement(bm::fisher_f_distribution<>(d1, d2), f));
}

}  // namespace roundtable::dist
