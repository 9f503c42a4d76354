#pragma once

#include <string>

namespace tpf {

// All internal computation is SI; conversion happens once at config load.
inline constexpr double kMdToM2 = 9.869233e-16;
inline constexpr double kBarToPa = 1.0e5;
inline constexpr double kCpToPaS = 1.0e-3;
inline constexpr double kDayToS = 86400.0;

/// Converts a tagged value to SI. Unknown unit strings are rejected.
/// Accepted: m, m2, md, bar, Pa, cP, Pa.s, day, s, kg/m3, m3/day, m/day,
/// m/s, m/s2, bar.md^1/2, Pa.m, 1.
double to_si(double value, const std::string& unit);

} // namespace tpf
