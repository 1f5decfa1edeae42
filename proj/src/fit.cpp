#include "alab/fit.hpp"

#include <cmath>
#include <vector>

#include "alab/error.hpp"

namespace alab {

namespace {

bool usable(double x, double y) { return std::isfinite(x) && std::isfinite(y) && x > 0 && y > 0; }

// Two-sided 95% Student t quantiles for 1..30 degrees of freedom.
double t95(std::size_t dof) {
  static const double table[30] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                   2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                   2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return 0.0;
  return dof <= 30 ? table[dof - 1] : 1.96;
}

}  // namespace

std::size_t usable_points(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("fit_rate: x and y differ in length");
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) k += usable(x[i], y[i]) ? 1 : 0;
  return k;
}

RateFit fit_rate(std::span<const double> x, std::span<const double> y) {
  RateFit f;
  const std::size_t k = usable_points(x, y);
  f.used = k;
  f.excluded = x.size() - k;
  if (k < 3) throw InvalidInput("fit_rate: need at least 3 positive values, got " + std::to_string(k));
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (usable(x[i], y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0)) throw InvalidInput("fit_rate: all x values coincide");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    sse += r * r;
  }
  // Constant data fits exactly; report R^2 = 1 rather than 0/0.
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  f.slope_ci95 = t95(k - 2) * std::sqrt(sse / static_cast<double>(k - 2) / sxx);
  if (f.excluded > 0) f.note = std::to_string(f.excluded) + " nonpositive point(s) excluded";
  return f;
}

}  // namespace alab
