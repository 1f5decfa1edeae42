#pragma once
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alab/manifold.hpp"

namespace alab {

// ------------------------------------------------------------- full system

// Exponential Euler in the eigenbasis of a complete SpectralData:
//   c <- e^{-lambda tau} c + (1 - e^{-lambda tau}) / lambda * <f(u), phi>,  tau = h / substeps.
Vec step_full(const SpectralData& sd, const FSpec& f, std::span<const double> u, double h,
              std::size_t substeps);

struct FullEquilibrium {
  Vec u;
  double residual = 0.0;  // ||A u - f(u)||_{L2}
  std::size_t iterations = 0;
  bool converged = false;
};
// Newton on the tridiagonal system S u - W f(u) = 0.
FullEquilibrium newton_full(const OperatorDisc& op, const FSpec& f, std::span<const double> u0,
                            double tol = 1e-11, std::size_t max_iter = 60);

// ------------------------------------------------------------ fields on R^n

struct VectorField {
  std::size_t n = 1;
  std::function<Vec(std::span<const double>)> eval;
  Vec operator()(std::span<const double> z) const { return eval(z); }
};

// Central-difference Jacobian, row major.
std::vector<double> jacobian(const VectorField& F, std::span<const double> z, double step = 1e-6);

// Limit flow u0' = -A0 u0 + f(u0) written in the coordinates z of the limit eigenbasis.
VectorField limit_field(const LimitOperator& L, const FSpec& f);

// Reduced flow on the manifold in j_eps coordinates. The field is the limit field plus a
// tabulated correction (reduced minus limit) interpolated multilinearly on `pts` nodes per
// dimension over the section box.
struct ReducedField {
  VectorField field;
  VectorField limit;
  GraphSection correction;  // m = n, values = reduced - limit at nodes
};
ReducedField make_reduced_field(const GraphSection& s, const ManifoldSetup& ms,
                                std::size_t pts = 0);

// Classical RK4 flow for time T with step dt (last step shortened to land on T).
Vec flow(const VectorField& F, std::span<const double> z, double T, double dt = 0.005);

using Map = std::function<Vec(std::span<const double>)>;
Map time_one_map(const VectorField& F, double dt = 0.005);

// sup over a tensor grid of the box of ||S1 z - S2 z|| in the weighted R^n norm.
double map_sup_gap(const Map& S1, const Map& S2, std::span<const double> lo,
                   std::span<const double> hi, std::span<const double> weights,
                   std::size_t pts_per_dim = 21);

// Weighted Euclidean norm sqrt(sum w_i x_i^2).
double weighted_norm(std::span<const double> x, std::span<const double> w);

// ------------------------------------------------------------- equilibria

struct Equilibrium {
  Vec z;
  Vec eig_re, eig_im;
  std::vector<Vec> unstable_dirs;  // real eigenvectors with positive real part
  std::size_t unstable_dim = 0;
  bool hyperbolic = true;
  double residual = 0.0;
};

struct EquilibriumSet {
  std::vector<Equilibrium> points;
  std::size_t seeds_failed = 0;
  bool all_hyperbolic() const;
};

// Newton from a tensor grid of seeds; duplicates within 1e-6 merged; sorted
// lexicographically for determinism.
EquilibriumSet find_equilibria(const VectorField& F, std::span<const double> lo,
                               std::span<const double> hi, std::size_t seeds_per_dim = 9);

// ||u* - E u0*||_{X^{1/2}} where u* solves the full problem from the seed E u0*.
struct EquilibriumDistance {
  Vec u0;
  double distance = 0.0;
  double residual = 0.0;
  bool converged = false;
};
EquilibriumDistance equilibrium_rate(std::span<const double> u0_star, const OperatorDisc& op,
                                     const CouplingPair& cp, const FSpec& f);

// -------------------------------------------------------------- serialization

std::string equilibria_csv(const EquilibriumSet& eq);

}  // namespace alab
