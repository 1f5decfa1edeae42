#pragma once
#include <cstddef>
#include <span>
#include <vector>

#include "alab/grid.hpp"

namespace alab {

using Vec = std::vector<double>;

// Symmetric positive operator A = W^{-1} S where S is the tridiagonal stiffness
//   (S u)_i = sum over links (i,i+1) of c_i (u_i - u_{i+1}) + w_i sigma_i u_i.
// For grid problems c_i = p_{i+1/2}/h and sigma_i = lambda + V_i; the synthetic
// block fixture reuses the same layout on an index space.
struct OperatorDisc {
  Grid grid;
  Vec mass;         // W, diagonal
  Vec conductance;  // c_i on link (i, i+1), size n-1
  Vec shift;        // sigma_i, size n
  double epsilon = 1.0;
  double m0 = 0.1;
  ProblemTag tag = ProblemTag::homogenization;

  std::size_t size() const { return mass.size(); }
  Vec stiffness_diag() const;
  Vec stiffness_off() const { return negated_conductance(); }
  Vec negated_conductance() const;
  // Largest absolute row sum of A, a bound on the spectral radius.
  double norm_bound() const;
};

struct LimitOperator {
  std::size_t n_dim = 1;
  std::vector<double> matrix;   // row major n_dim x n_dim
  std::vector<double> weights;  // limit inner product weights
  ProblemTag tag = ProblemTag::homogenization;

  double operator()(std::size_t i, std::size_t j) const { return matrix[i * n_dim + j]; }
  Vec apply(std::span<const double> u) const;
  Vec solve(std::span<const double> g) const;
  double inner(std::span<const double> u, std::span<const double> v) const;
};

OperatorDisc assemble(const Grid& grid, const Coefficients& coeff);
// diag(A0, K/eps) on R^{n+m} with the limit weights on the first block.
OperatorDisc assemble_synthetic(const ProblemParams& prm, double eps);
LimitOperator limit_operator(ProblemTag tag, const ProblemParams& prm);

double l2_inner(const Grid& grid, std::span<const double> u, std::span<const double> v);
double l2_inner(const OperatorDisc& op, std::span<const double> u, std::span<const double> v);
double l2_norm(const OperatorDisc& op, std::span<const double> u);
// Sum of c_i du_i dv_i + w_i sigma_i u_i v_i: no cancellation for u = v.
double energy_inner(const OperatorDisc& op, std::span<const double> u, std::span<const double> v);
double energy_norm(const OperatorDisc& op, std::span<const double> u);

// A u evaluated in flux form.
Vec apply_op(const OperatorDisc& op, std::span<const double> u);
// A^{-1} g by a tridiagonal solve with one flux-form refinement step.
Vec solve(const OperatorDisc& op, std::span<const double> g);

// Solve the symmetric tridiagonal system T x = b (diag d, off e); throws on zero pivot.
Vec tridiagonal_solve(std::span<const double> d, std::span<const double> e,
                      std::span<const double> b);

}  // namespace alab
