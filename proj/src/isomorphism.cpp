#include "alab/isomorphism.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "alab/error.hpp"

namespace alab {

LimitSpectrum limit_spectrum(const LimitOperator& L) {
  const std::size_t n = L.n_dim;
  // Symmetrize with the limit weights: B = W^{1/2} A W^{-1/2}.
  Eigen::MatrixXd B(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      B(i, j) = std::sqrt(L.weights[i]) * L(i, j) / std::sqrt(L.weights[j]);
  B = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  LimitSpectrum s;
  s.n = n;
  s.eigenvalues.resize(n);
  s.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    s.eigenvalues[j] = es.eigenvalues()(j);
    Eigen::VectorXd y = es.eigenvectors().col(j);
    for (std::size_t i = 0; i < n; ++i) y(i) /= std::sqrt(L.weights[i]);
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(y(i)) > 1e-12) {
        if (y(i) < 0) y = -y;
        break;
      }
    for (std::size_t i = 0; i < n; ++i) s.vectors[j * n + i] = y(i);
  }
  return s;
}

Isomorphism make_isomorphism(const SpectralSplit& sp, const LimitOperator& L,
                             const CouplingPair& cp) {
  const std::size_t n = L.n_dim;
  if (sp.n_keep != n || cp.n_dim != n) throw InvalidInput("isomorphism: dimension mismatch");
  Isomorphism iso;
  iso.n = n;
  iso.limit = limit_spectrum(L);
  iso.psi.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec lifted = cp.lift({iso.limit.vectors.data() + j * n, n});
    const Vec c = sp.sd->coefficients(lifted, n);
    for (std::size_t k = 0; k < n; ++k) iso.psi[k * n + j] = c[k];
  }
  Eigen::MatrixXd P(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) P(k, j) = iso.psi[k * n + j];
  const Eigen::MatrixXd Pi = P.inverse();
  iso.psi_inv.resize(n * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) iso.psi_inv[k * n + j] = Pi(k, j);
  iso.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) iso.weights[i] = sp.lambda(i);
  return iso;
}

namespace {
Vec matvec(const std::vector<double>& m, std::span<const double> x, std::size_t n) {
  Vec y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] += m[i * n + j] * x[j];
  return y;
}
}  // namespace

Vec Isomorphism::to_eigen(std::span<const double> z) const { return matvec(psi, z, n); }
Vec Isomorphism::from_eigen(std::span<const double> c) const { return matvec(psi_inv, c, n); }

Vec Isomorphism::to_limit(std::span<const double> z) const {
  Vec u(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) u[i] += limit.vectors[j * n + i] * z[j];
  return u;
}

Vec Isomorphism::from_limit(std::span<const double> u0) const {
  // Orthonormal in the limit weights, so z_j = <u0, phi0_j>_{W0}; the weights
  // are implied by the limit operator that produced the basis.
  Eigen::MatrixXd V(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) V(i, j) = limit.vectors[j * n + i];
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) b(i) = u0[i];
  const Eigen::VectorXd z = V.partialPivLu().solve(b);
  return Vec(z.data(), z.data() + n);
}

double Isomorphism::norm(std::span<const double> z) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += weights[i] * z[i] * z[i];
  return std::sqrt(s);
}

double Isomorphism::dist(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += weights[i] * (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace alab
