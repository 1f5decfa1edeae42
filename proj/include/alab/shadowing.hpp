#pragma once
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "alab/attractor.hpp"

namespace alab {

// A map on R^n with a weighted Euclidean norm and a domain box.
struct DiscreteMap {
  std::size_t n = 1;
  Map T;
  // Optional analytic Jacobian (row major); central differences otherwise.
  std::function<std::vector<double>(std::span<const double>)> jac;
  Vec lo, hi;
  Vec weights;  // norm weights; empty means all ones

  std::vector<double> jacobian(std::span<const double> x, double step = 1e-6) const;
  double norm(std::span<const double> x) const;
};

DiscreteMap make_map(std::size_t n, Map T, Vec lo, Vec hi, Vec weights = {});

// max_k ||T(x_k) - x_{k+1}||.
double defect(const DiscreteMap& map, const std::vector<Vec>& seq);

struct ShadowResult {
  std::vector<Vec> orbit;
  double distance = 0.0;  // max_k ||y_k - x_k||
  double residual = 0.0;  // defect of the returned orbit
  std::size_t iterations = 0;
  bool converged = false;
  std::string message;
};

// Newton on F(y)_k = y_{k+1} - T(y_k) with the stable part of y_0 - x_0 and the unstable
// part of y_K - x_K pinned to zero (splittings from the end-point Jacobians). Unbalanced
// splittings fall back to minimum-norm least-squares steps with soft end conditions.
ShadowResult shadow(const DiscreteMap& map, const std::vector<Vec>& pseudo, double tol = 1e-10,
                    std::size_t max_iter = 30);

// Fixed points are hyperbolic when no Jacobian eigenvalue lies within `margin` of the unit circle.
bool hyperbolic_fixed_points(const DiscreteMap& map, const std::vector<Vec>& fixed_points,
                             double margin = 1e-6);

struct LpspTrial {
  std::size_t id = 0;
  double defect = 0.0;
  double distance = 0.0;
  double ratio = 0.0;
  bool converged = false;
};
struct LpspEstimate {
  double L_hat = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  bool low_confidence = false;
  std::vector<LpspTrial> log;
  std::string to_csv() const;
};
// Random pseudo-orbits of length `segment` with defects in [delta0/10, delta0]; half use a fresh
// random direction per step, half a persistent one. Throws RegimeError unless every listed fixed
// point is hyperbolic.
LpspEstimate lpsp_estimate(const DiscreteMap& map, const std::vector<Vec>& fixed_points,
                           std::size_t trials, double delta0, unsigned seed,
                           std::size_t segment = 200);

// Interval attractor [x_min*, x_max*] of a scalar map: the outermost stable fixed points in the box.
struct ScalarMapAttractor {
  std::vector<double> fixed_points;
  std::vector<bool> stable;
  double lo = 0.0, hi = 0.0;
};
ScalarMapAttractor scalar_map_attractor(const Map& T, double lo, double hi,
                                        std::size_t scan = 4001);

struct BoundVerdict {
  bool applicable = true;
  bool pass = false;
  double distance = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - distance
  std::string note;
};
// dist_H(A1, A2) <= L_hat * sup_gap, given both maps passed the hyperbolicity gate.
BoundVerdict attractor_bound(double attractor_distance, double sup_gap, double L_hat,
                             bool maps_hyperbolic, double delta0);

}  // namespace alab
