#include "roundtable/angles.hpp"

#include <cmath>

namespace roundtable {

double wrap_deg_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod of a tiny negative number can round up to exactly 360.
  if (w >= 360.0) w -= 360.0;
  return w;
}

double wrap_deg_180(double deg) {
  double w = wrap_deg_360(deg + 180.0) - 180.0;
  if (w >= 180.0) w -= 360.0;
  return w;
}

double signed_delta_deg(double from, double to) { return wrap_deg_180(to - from); }

}  // namespace roundtable
