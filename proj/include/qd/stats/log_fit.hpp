#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qd::stats {

class DegenerateFit : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LogFit {
  double a = 0.0;  // y = a*ln(x) + b
  double b = 0.0;
  double r_squared = 0.0;
};

// Least squares of y = a*ln(x) + b. r^2 = 1 - SS_res/SS_tot; constant y
// (SS_tot = 0) is reported as a perfect fit with a = 0.
inline LogFit fit_log_curve(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3)
    throw DegenerateFit("log fit needs at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& [x, y] : pts) {
    if (x < 1.0) throw DegenerateFit("log fit requires x >= 1");
    double lx = std::log(x);
    sx += lx;
    sy += y;
    sxx += lx * lx;
    sxy += lx * y;
  }
  double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12 * n * n)
    throw DegenerateFit("log fit requires distinct x values");

  LogFit fit;
  fit.a = (n * sxy - sx * sy) / denom;
  fit.b = (sy - fit.a * sx) / n;

  double mean_y = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (const auto& [x, y] : pts) {
    double pred = fit.a * std::log(x) + fit.b;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

// Evaluations needed for the fitted curve to reach `target` archive size.
inline double extrapolate_evaluations(const LogFit& fit, double target) {
  if (fit.a == 0.0)
    throw DegenerateFit("flat fit cannot be extrapolated");
  return std::exp((target - fit.b) / fit.a);
}

}  // namespace qd::stats
