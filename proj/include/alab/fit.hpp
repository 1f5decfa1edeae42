#pragma once
#include <cstddef>
#include <span>
#include <string>

namespace alab {

// Least squares line through (log x, log y).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_ci95 = 0.0;  // half width; 0 when only two points remain
  std::size_t used = 0;
  std::size_t excluded = 0;  // points with nonpositive or non-finite values
  std::string note;
};

// Requires at least 3 usable points; throws InvalidInput otherwise.
RateFit fit_rate(std::span<const double> x, std::span<const double> y);
// Number of usable (positive, finite) pairs.
std::size_t usable_points(std::span<const double> x, std::span<const double> y);

}  // namespace alab
