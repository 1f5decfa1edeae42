#pragma once
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace alab {

enum class ProblemTag { homogenization, localized, synthetic };
std::string_view to_string(ProblemTag tag);
ProblemTag parse_problem_tag(std::string_view s);

// Uniform vertex grid on [0,1]: nodes x_i = i h, i = 0..n_cells, trapezoid weights.
struct Grid {
  std::size_t n_cells = 0;
  double h = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static Grid uniform(std::size_t n_cells);
  std::size_t size() const { return nodes.size(); }
  double midpoint(std::size_t cell) const { return (static_cast<double>(cell) + 0.5) * h; }
};

// Physical and numerical parameters shared by the problem families.
struct ProblemParams {
  double lambda = 1.0;
  double V0 = -0.5;
  double a1 = 1.0;
  double l1 = 1.0;
  double x1 = 0.5;
  double e_outer = 1.0;  // large-diffusion level e/eps outside the localized zone
  double m0 = 0.1;
  // Homogenization potential V_eps = V0 + amp * eps^power * (offset + sin(2 pi x)).
  double potential_amp = 1.0;
  double potential_power = 1.0;
  double potential_offset = 0.0;
  // Synthetic block fixture: tail eigenvalues (k pi)^2 / eps, k = 1..synthetic_tail.
  std::size_t synthetic_tail = 40;
  ProblemTag synthetic_base = ProblemTag::localized;
};

// Diffusion sampled per cell (flux form) and shift lambda + V per node.
struct Coefficients {
  std::vector<double> p;  // n_cells values
  std::vector<double> V;  // n_cells + 1 values
  double lambda = 1.0;
  double m0 = 0.1;
  double epsilon = 1.0;
  ProblemTag tag = ProblemTag::homogenization;
};

Coefficients constant_coefficients(const Grid& g, double p, double V, double lambda,
                                   double m0 = 0.1);
// p = 1/eps, V as in ProblemParams.
Coefficients homogenization_coefficients(const Grid& g, const ProblemParams& prm, double eps);
// Small diffusion eps*a1' on the zone around x1, e/eps away from it, cubic joins.
// Each cell stores the harmonic mean of p over the cell (exact series resistance).
Coefficients localized_coefficients(const Grid& g, const ProblemParams& prm, double eps);
double localized_diffusion(const ProblemParams& prm, double eps, double x);

}  // namespace alab
