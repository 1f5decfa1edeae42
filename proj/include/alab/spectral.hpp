#pragma once
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alab/operators.hpp"

namespace alab {

struct CouplingPair;

// Mass-orthonormal eigenpairs of an OperatorDisc, ascending. Eigenvector j is
// stored contiguously at vectors[j * n .. (j+1) * n).
struct SpectralData {
  std::shared_ptr<const OperatorDisc> op;
  Vec eigenvalues;
  Vec vectors;
  // Reorthogonalized clusters found by the solver (diagnostic).
  std::size_t largest_cluster = 1;

  std::size_t n() const { return op->size(); }
  std::size_t count() const { return eigenvalues.size(); }
  bool complete() const { return count() == n(); }
  std::span<const double> vec(std::size_t j) const { return {vectors.data() + j * n(), n()}; }
  // c_j = <u, phi_j>_{L2}, j < count (or < k).
  Vec coefficients(std::span<const double> u, std::size_t k) const;
  Vec coefficients(std::span<const double> u) const { return coefficients(u, count()); }
  // sum_j c_j phi_j over j < c.size().
  Vec reconstruct(std::span<const double> c) const;
};

// Eigenpairs 0..k-1 (k = 0 means all).
SpectralData eigendecompose(const OperatorDisc& op, std::size_t k = 0);
SpectralData eigendecompose(std::shared_ptr<const OperatorDisc> op, std::size_t k = 0);

// Sturm count: number of eigenvalues of the symmetric tridiagonal (d, e) below x.
std::size_t sturm_count(std::span<const double> d, std::span<const double> e2, double x);

struct SpectralGap {
  double lower = 0.0;  // lambda_n
  double upper = 0.0;  // lambda_{n+1}
  double gap() const { return upper - lower; }
  double ratio() const { return upper / lower; }
};

struct SpectralSplit {
  std::shared_ptr<const SpectralData> sd;
  std::size_t n_keep = 0;
  SpectralGap gap;

  const OperatorDisc& op() const { return *sd->op; }
  double lambda(std::size_t j) const { return sd->eigenvalues[j]; }
  Vec project(std::span<const double> u) const;     // Q u
  Vec complement(std::span<const double> u) const;  // (I - Q) u
};

SpectralSplit split(std::shared_ptr<const SpectralData> sd, std::size_t n_keep);

enum class Part { minus, plus, full };
// e^{-A t} restricted to Z (minus), Y (plus) or everything; t < 0 only on Y.
Vec semigroup_apply(const SpectralSplit& sp, double t, std::span<const double> u, Part part);
// A^alpha u, alpha in (0,1].
Vec fractional_apply(const SpectralData& sd, double alpha, std::span<const double> u);
// ||u||_{X^alpha} via the eigen expansion.
double fractional_norm(const SpectralData& sd, double alpha, std::span<const double> u);

struct EstimateRow {
  std::string item;
  double measured_M = 0.0;
  double exponent = 0.0;
  bool pass = false;
  std::string note;
};
struct EstimateReport {
  double beta = 0.0, gamma = 0.0, gamma_bar = 0.0, tau_hat = 0.0;
  std::vector<EstimateRow> rows;
  bool all_pass() const;
  std::string to_csv() const;
};

struct LimitOperator;
// Measures the smallest constants in the seven linear semigroup estimates.
EstimateReport verify_linear_estimates(const SpectralSplit& sp, const LimitOperator& limit,
                                       const CouplingPair& cp, std::span<const double> t_samples,
                                       std::size_t z_samples, double delta, double tau_hat,
                                       unsigned seed);

}  // namespace alab
