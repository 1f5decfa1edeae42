#pragma once
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alab/coupling.hpp"
#include "alab/isomorphism.hpp"
#include "alab/nonlinearity.hpp"
#include "alab/spectral.hpp"

namespace alab {

// Everything the graph transform needs for one epsilon.
struct ManifoldSetup {
  SpectralSplit sp;
  LimitOperator limit;
  CouplingPair cp;
  FSpec f = FSpec::zero();
  Isomorphism iso;
  std::size_t tail = 200;  // complement modes n_keep .. n_keep + tail - 1

  std::size_t n() const { return sp.n_keep; }
  std::size_t m() const { return tail; }
  const SpectralData& sd() const { return *sp.sd; }
};

ManifoldSetup make_manifold_setup(SpectralSplit sp, LimitOperator limit, CouplingPair cp, FSpec f,
                                  std::size_t tail = 200);

// Grid-sampled map s: Y -> Z over a box in j_eps coordinates; values are the
// tail eigen-coefficients at each node (node index runs fastest in dimension 0).
struct GraphSection {
  std::size_t n = 1;
  std::size_t m = 0;
  std::size_t pts = 33;
  Vec lo, hi;
  Vec values;  // nodes() * m
  double sup_norm = 0.0;
  double lip_bound = 0.0;
  double epsilon = 0.0;

  std::size_t nodes() const;
  Vec node_coords(std::size_t idx) const;
  std::span<const double> node_values(std::size_t idx) const { return {values.data() + idx * m, m}; }
  // Multilinear interpolation; points outside the box are clamped to it.
  Vec eval(std::span<const double> z) const;
  void eval_into(std::span<const double> z, double* out) const;
  // True when z lies in the box scaled by `factor` about its center.
  bool inside(std::span<const double> z, double factor = 1.0) const;
};

GraphSection zero_section(std::size_t n, std::size_t m, std::span<const double> lo,
                          std::span<const double> hi, std::size_t pts = 33);

// X^{1/2} norm of a tail coefficient vector.
double tail_energy_norm(const ManifoldSetup& ms, std::span<const double> s);
// Recompute sup_norm and lip_bound (lip_bound against the Y norm of X^{1/2}).
void refresh_norms(const ManifoldSetup& ms, GraphSection& s);
// sup over nodes of the X^{1/2} distance between two sections on the same grid.
double section_distance(const ManifoldSetup& ms, const GraphSection& a, const GraphSection& b);

struct Inequality {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct ManifoldConstants {
  double D = 0.0, Delta = 0.5, rho_f = 0.0, beta = 0.0, gamma = 0.0, M = 1.0;
  double contraction = 0.0;
  double L = 0.0;
  std::vector<Inequality> inequalities;
  bool all_hold() const;
  const Inequality* first_failure() const;
};

// Evaluates every inequality of the manifold construction; never throws.
ManifoldConstants evaluate_constants(double beta, double gamma, double rho_f, double M = 1.0,
                                     double Delta = 0.5);
// beta = lambda_{n+1}, gamma = largest limit eigenvalue + delta. Throws RegimeError naming the
// first failing inequality.
ManifoldConstants check_constants(const SpectralSplit& sp, const LimitOperator& limit,
                                  double rho_f, double delta = 0.5, double Delta = 0.5);
// max(sup|f|, sup|f'|) over the range of grid values reached by lifts of the box.
double local_rho_f(const ManifoldSetup& ms, std::span<const double> lo, std::span<const double> hi);

struct TransformParams {
  double T_h = 0.0;
  double h = 0.01;
  std::size_t steps = 1;
  double tol = 1e-6;
  double exit_factor = 2.0;
  unsigned threads = 0;  // 0: hardware concurrency
};
TransformParams transform_params(const ManifoldConstants& mc, double lambda_n, double tol = 1e-6);

struct TransformDiagnostics {
  double tail_estimate = 0.0;   // a-posteriori X^{1/2} bound of the dropped modes
  double max_excursion = 0.0;   // largest box-relative distance reached backward
};

GraphSection graph_transform_step(const GraphSection& s, const ManifoldSetup& ms,
                                  const TransformParams& tp, TransformDiagnostics* diag = nullptr);

struct FixedPointResult {
  GraphSection section;
  std::size_t iterations = 0;
  double last_increment = 0.0;
  double residual = 0.0;  // |||Phi(s*) - s*|||
  std::vector<double> increments;
  TransformDiagnostics diag;
};
FixedPointResult solve_fixed_point(const GraphSection& s0, const ManifoldSetup& ms,
                                   const TransformParams& tp, std::size_t max_iter = 30);

// Grid function v + s(v) for v with eigen coordinates c (size n).
Vec lift_point(const ManifoldSetup& ms, std::span<const double> c, std::span<const double> s);
// -A^+ v + Q f(v + s(v)) in eigen coordinates; s evaluated from the section at z = j(v).
Vec reduced_rhs(const GraphSection& s, const ManifoldSetup& ms, std::span<const double> c);
// The same field in j_eps coordinates.
Vec reduced_rhs_z(const GraphSection& s, const ManifoldSetup& ms, std::span<const double> z);

void write_section(std::ostream& os, const GraphSection& s);
GraphSection read_section(std::istream& is);

}  // namespace alab
