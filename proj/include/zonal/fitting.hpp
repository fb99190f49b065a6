#pragma once

// Small helpers shared by the sweep drivers and the test suites: log-log
// slope fits and max/min band ratios for empirically fitted constants.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace zonal {

inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_loglog_slope: need matching sizes >= 2");
  }
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Slope fitted over the top half of the points (assumed sorted by x).
inline double fit_loglog_slope_tophalf(const std::vector<double>& x,
                                       const std::vector<double>& y) {
  const size_t n = x.size();
  const size_t lo = n / 2;
  std::vector<double> xs(x.begin() + lo, x.end());
  std::vector<double> ys(y.begin() + lo, y.end());
  if (xs.size() < 2) {
    xs.assign(x.end() - 2, x.end());
    ys.assign(y.end() - 2, y.end());
  }
  return fit_loglog_slope(xs, ys);
}

inline double band_ratio(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("band_ratio: empty");
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  if (!(*mn > 0.0)) throw std::invalid_argument("band_ratio: needs positive entries");
  return *mx / *mn;
}

}  // namespace zonal
