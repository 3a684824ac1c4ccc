#pragma once

#include <numbers>

namespace roundtable {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps to [-180, 180).
double wrap_deg_180(double deg);

/// Wraps to [0, 360).
double wrap_deg_360(double deg);

/// Minimal signed difference `to - from`, in [-180, 180).
double signed_delta_deg(double from, double to);

}  // namespace roundtable
