#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace nlslab {

struct LinearFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;

  bool valid() const { return std::isfinite(slope) && std::isfinite(intercept); }
  double operator()(double x) const { return intercept + slope * x; }
};

// Ordinary least squares y ≈ intercept + slope x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  LinearFit out;
  out.points = x.size();
  if (x.size() < 2 || x.size() != y.size()) return out;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  return out;
}

}  // namespace nlslab
