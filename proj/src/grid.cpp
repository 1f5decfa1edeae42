#include "alab/grid.hpp"

#include <cmath>
#include <numbers>

#include "alab/error.hpp"

namespace alab {

std::string_view to_string(ProblemTag tag) {
  switch (tag) {
    case ProblemTag::homogenization: return "homogenization";
    case ProblemTag::localized: return "localized";
    case ProblemTag::synthetic: return "synthetic";
  }
  return "unknown";
}

ProblemTag parse_problem_tag(std::string_view s) {
  if (s == "homogenization") return ProblemTag::homogenization;
  if (s == "localized") return ProblemTag::localized;
  if (s == "synthetic") return ProblemTag::synthetic;
  throw InvalidInput("unknown problem_tag '" + std::string(s) + "'");
}

Grid Grid::uniform(std::size_t n_cells) {
  if (n_cells < 2) throw InvalidInput("grid needs at least 2 cells");
  Grid g;
  g.n_cells = n_cells;
  g.h = 1.0 / static_cast<double>(n_cells);
  g.nodes.resize(n_cells + 1);
  g.weights.assign(n_cells + 1, g.h);
  for (std::size_t i = 0; i <= n_cells; ++i) g.nodes[i] = static_cast<double>(i) / n_cells;
  g.weights.front() = g.weights.back() = 0.5 * g.h;
  return g;
}

Coefficients constant_coefficients(const Grid& g, double p, double V, double lambda, double m0) {
  Coefficients c;
  c.p.assign(g.n_cells, p);
  c.V.assign(g.size(), V);
  c.lambda = lambda;
  c.m0 = m0;
  return c;
}

Coefficients homogenization_coefficients(const Grid& g, const ProblemParams& prm, double eps) {
  if (!(eps > 0)) throw InvalidInput("epsilon must be positive");
  Coefficients c;
  c.tag = ProblemTag::homogenization;
  c.epsilon = eps;
  c.lambda = prm.lambda;
  c.m0 = prm.m0;
  c.p.assign(g.n_cells, 1.0 / eps);
  c.V.resize(g.size());
  const double amp = prm.potential_amp * std::pow(eps, prm.potential_power);
  for (std::size_t i = 0; i < g.size(); ++i)
    c.V[i] = prm.V0 + amp * (prm.potential_offset + std::sin(2.0 * std::numbers::pi * g.nodes[i]));
  return c;
}

double localized_diffusion(const ProblemParams& prm, double eps, double x) {
  const double a1p = prm.a1 * (1.0 + eps);
  const double l1p = prm.l1 * (1.0 + eps);
  const double inner = eps * prm.l1;
  const double outer = eps * l1p;
  const double lo = eps * a1p;
  const double hi = prm.e_outer / eps;
  const double r = std::abs(x - prm.x1);
  if (r <= inner) return lo;
  if (r >= outer) return hi;
  const double t = (r - inner) / (outer - inner);
  return lo + (hi - lo) * t * t * (3.0 - 2.0 * t);
}

Coefficients localized_coefficients(const Grid& g, const ProblemParams& prm, double eps) {
  if (!(eps > 0)) throw InvalidInput("epsilon must be positive");
  if (!(prm.x1 > 0 && prm.x1 < 1)) throw InvalidInput("x1 must lie in (0,1)");
  Coefficients c;
  c.tag = ProblemTag::localized;
  c.epsilon = eps;
  c.lambda = prm.lambda;
  c.m0 = prm.m0;
  c.V.assign(g.size(), 0.0);
  c.p.resize(g.n_cells);
  const double z_lo = prm.x1 - eps * prm.l1 * (1.0 + eps);
  const double z_hi = prm.x1 + eps * prm.l1 * (1.0 + eps);
  constexpr int kSub = 64;
  for (std::size_t k = 0; k < g.n_cells; ++k) {
    const double a = g.nodes[k], b = g.nodes[k + 1];
    if (b <= z_lo || a >= z_hi) {
      c.p[k] = localized_diffusion(prm, eps, 0.5 * (a + b));
      continue;
    }
    double resist = 0.0;
    for (int s = 0; s < kSub; ++s) {
      const double x = a + (s + 0.5) * (b - a) / kSub;
      resist += 1.0 / localized_diffusion(prm, eps, x);
    }
    c.p[k] = kSub / resist;
  }
  return c;
}

}  // namespace alab
