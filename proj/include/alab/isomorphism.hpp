#pragma once
#include <cstddef>
#include <span>
#include <vector>

#include "alab/coupling.hpp"
#include "alab/operators.hpp"
#include "alab/spectral.hpp"

namespace alab {

// Eigenpairs of the limit operator, orthonormal in the limit weights, ascending.
struct LimitSpectrum {
  std::size_t n = 1;
  Vec eigenvalues;
  std::vector<double> vectors;  // column j at [j*n, (j+1)*n)
};
LimitSpectrum limit_spectrum(const LimitOperator& L);

// Coordinates z in R^n for Y (basis psi_j = Q E phi0_j) and for the limit
// space (basis phi0_j). The R^n norm weights coordinate i by lambda_i^eps.
struct Isomorphism {
  std::size_t n = 1;
  LimitSpectrum limit;
  std::vector<double> psi;      // n x n row major: psi[k*n + j] = <psi_j, phi_k>
  std::vector<double> psi_inv;  // inverse of psi
  Vec weights;                  // lambda_i^eps (alpha = 1/2)

  // Eigen coordinates c (c_k = <v, phi_k>, k < n) of the point with coordinates z.
  Vec to_eigen(std::span<const double> z) const;
  Vec from_eigen(std::span<const double> c) const;
  // Limit state u0 = sum_j z_j phi0_j and back.
  Vec to_limit(std::span<const double> z) const;
  Vec from_limit(std::span<const double> u0) const;
  double norm(std::span<const double> z) const;
  double dist(std::span<const double> a, std::span<const double> b) const;
};

Isomorphism make_isomorphism(const SpectralSplit& sp, const LimitOperator& L,
                             const CouplingPair& cp);

}  // namespace alab
