#include "tpflow/units.hpp"

#include <cmath>
#include <stdexcept>

namespace tpf {

double to_si(double value, const std::string& unit) {
  if (unit == "1" || unit == "m" || unit == "m2" || unit == "Pa" ||
      unit == "s" || unit == "kg/m3" || unit == "m/s" || unit == "m/s2" ||
      unit == "Pa.s" || unit == "Pa.m")
    return value;
  if (unit == "md") return value * kMdToM2;
  if (unit == "bar") return value * kBarToPa;
  if (unit == "cP") return value * kCpToPaS;
  if (unit == "day") return value * kDayToS;
  if (unit == "m3/day" || unit == "m/day") return value / kDayToS;
  if (unit == "bar.md^1/2") return value * kBarToPa * std::sqrt(kMdToM2);
  throw std::runtime_error("unknown unit '" + unit + "'");
}

} // namespace tpf
