#pragma once
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "alab/operators.hpp"
#include "alab/spectral.hpp"

namespace testing {

using alab::Vec;
inline constexpr double kPi = std::numbers::pi;

inline Vec random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// -u'' + u with Neumann ends: p = 1, V = 0, lambda = 1.
inline alab::OperatorDisc neumann_fixture(std::size_t n_cells) {
  const alab::Grid g = alab::Grid::uniform(n_cells);
  return alab::assemble(g, alab::constant_coefficients(g, 1.0, 0.0, 1.0));
}

inline Vec sample(const alab::Grid& g, double (*f)(double)) {
  Vec v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.nodes[i]);
  return v;
}

inline alab::ProblemParams localized_params(double lambda = 1.0) {
  alab::ProblemParams p;
  p.lambda = lambda;
  p.a1 = 1.0;
  p.l1 = 1.0;
  p.x1 = 0.5;
  return p;
}

inline std::shared_ptr<const alab::SpectralData> full_spectrum(alab::OperatorDisc op) {
  return std::make_shared<const alab::SpectralData>(
      alab::eigendecompose(std::make_shared<const alab::OperatorDisc>(std::move(op))));
}

}  // namespace testing
