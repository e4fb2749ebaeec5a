#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace radfid {

// Canonical number formatting for every CSV/JSON artifact: 9 significant
// digits, '.' decimal point, "inf"/"-inf"/"nan" sentinels.
inline std::string format_g9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Round-trips format_g9 output (and plain decimal text) back to double.
inline double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n-1); 0 when n < 2
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(n);
  if (n >= 2) {
    double q = 0.0;
    for (double x : xs) q += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(q / static_cast<double>(n - 1));
  }
  return out;
}

}  // namespace radfid
