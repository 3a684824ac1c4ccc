#pragma once

namespace roundtable::dist {

double normal_quantile(double p);
/// P(Z > z) for Z ~ N(mean, sd).
double normal_upper(double z, double mean = 0.0, double sd = 1.0);
/// Two-sided P(|T| >= |t|) for Student t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);
/// P(F > f) for the F(d1, d2) distribution.
double f_upper(double f, double d1, double d2);

}  // namespace roundtable::dist
