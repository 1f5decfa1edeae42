#include "alab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "alab/error.hpp"
#include "alab/kernels.hpp"

namespace alab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// LU with partial pivoting of a tridiagonal matrix (subdiag dl, diag d, superdiag du).
struct TriLU {
  Vec dl, d, du, du2;
  std::vector<unsigned char> swapped;

  void factor(double tiny) {
    const std::size_t n = d.size();
    du2.assign(n > 2 ? n - 2 : 0, 0.0);
    swapped.assign(n > 1 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
    for (double& x : d)
      if (std::abs(x) < tiny) x = std::copysign(tiny, x == 0.0 ? 1.0 : x);
  }

  void solve(Vec& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  }
};

// Deterministic start vector for inverse iteration (splitmix64 stream).
void start_vector(std::size_t j, Vec& x) {
  std::uint64_t s = 0x9E3779B97F4A7C15ull * (j + 1);
  for (double& v : x) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    v = static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
  }
}

double norm2(const Vec& x) { return std::sqrt(kernels::dot(x, x)); }

}  // namespace

std::size_t sturm_count(std::span<const double> d, std::span<const double> e2, double x) {
  const double pivmin = std::numeric_limits<double>::min() * 1e10;
  std::size_t count = 0;
  double q = d[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    q = d[i] - x - e2[i - 1] / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0) ++count;
  }
  return count;
}

SpectralData eigendecompose(const OperatorDisc& op, std::size_t k) {
  return eigendecompose(std::make_shared<const OperatorDisc>(op), k);
}

SpectralData eigendecompose(std::shared_ptr<const OperatorDisc> opp, std::size_t k) {
  const OperatorDisc& op = *opp;
  const std::size_t n = op.size();
  if (k == 0 || k > n) k = n;

  // Symmetrized matrix B = W^{-1/2} S W^{-1/2}.
  const Vec sd = op.stiffness_diag();
  Vec sq(n), bd(n), be(n - 1), be2(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = std::sqrt(op.mass[i]);
    bd[i] = sd[i] / op.mass[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    be[i] = -op.conductance[i] / (sq[i] * sq[i + 1]);
    be2[i] = be[i] * be[i];
  }
  double glo = std::numeric_limits<double>::max(), ghi = -glo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(be[i - 1]) : 0.0) + (i + 1 < n ? std::abs(be[i]) : 0.0);
    glo = std::min(glo, bd[i] - r);
    ghi = std::max(ghi, bd[i] + r);
  }
  const double normB = std::max(std::abs(glo), std::abs(ghi));
  const double abstol = kEps * normB;

  // Bisection, carrying the lower bracket forward since eigenvalues ascend.
  Vec mu(k);
  double carry = glo;
  for (std::size_t j = 0; j < k; ++j) {
    double a = carry, b = ghi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (b - a <= std::max(abstol, 4.0 * kEps * std::abs(mid))) break;
      if (sturm_count(bd, be2, mid) > j)
        b = mid;
      else
        a = mid;
    }
    mu[j] = 0.5 * (a + b);
    carry = a;
  }

  // Inverse iteration with Gram-Schmidt inside clusters where the expected
  // vector error eps*|B|/gap would exceed ~1e-11.
  const double sep_abs = 1e11 * kEps * normB;
  SpectralData out;
  out.op = opp;
  out.vectors.assign(k * n, 0.0);
  out.eigenvalues.resize(k);
  std::size_t cluster_start = 0;
  Vec x(n);
  TriLU lu;
  for (std::size_t j = 0; j < k; ++j) {
    const double sep = std::max({1e-3 * std::abs(mu[j]), sep_abs, 10.0 * abstol});
    if (j > 0 && mu[j] - mu[j - 1] > sep) cluster_start = j;
    out.largest_cluster = std::max(out.largest_cluster, j - cluster_start + 1);
    double shift = mu[j];
    // Shift identical eigenvalues apart slightly so the factorizations differ.
    if (j > cluster_start && mu[j] - mu[j - 1] < abstol) shift = mu[j - 1] + 10.0 * abstol;
    lu.dl = be;
    lu.du = be;
    lu.d.resize(n);
    for (std::size_t i = 0; i < n; ++i) lu.d[i] = bd[i] - shift;
    lu.factor(std::max(abstol, std::numeric_limits<double>::min() * 1e20));
    start_vector(j, x);
    bool converged = false;
    for (int it = 0; it < 6; ++it) {
      const double nx = norm2(x);
      for (double& v : x) v /= nx;
      lu.solve(x);
      for (std::size_t c = cluster_start; c < j; ++c) {
        const double* yc = out.vectors.data() + c * n;
        const double proj = kernels::active().dot(yc, x.data(), n);
        kernels::active().axpy(-proj, yc, x.data(), n);
      }
      const double grow = norm2(x);
      if (it >= 1 && grow * std::max(abstol, 1e-300) > 1e-3) {
        converged = true;
        if (it >= 2) break;
      }
    }
    double nx = norm2(x);
    for (double& v : x) v /= nx;
    for (std::size_t c = cluster_start; c < j; ++c) {
      const double* yc = out.vectors.data() + c * n;
      const double proj = kernels::active().dot(yc, x.data(), n);
      kernels::active().axpy(-proj, yc, x.data(), n);
    }
    nx = norm2(x);
    if (!converged || !(nx > 0.5)) {
      std::ostringstream os;
      os << "inverse iteration did not converge for eigenpair index " << j << " (mu = " << mu[j]
         << ")";
      throw ConvergenceError(os.str());
    }
    for (double& v : x) v /= nx;
    std::copy(x.begin(), x.end(), out.vectors.begin() + j * n);
  }

  // Back to phi = W^{-1/2} y, sign convention, energy-form Rayleigh quotient.
  for (std::size_t j = 0; j < k; ++j) {
    double* phi = out.vectors.data() + j * n;
    double amax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] /= sq[i];
      amax = std::max(amax, std::abs(phi[i]));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(phi[i]) > 1e-8 * amax) {
        if (phi[i] < 0)
          for (std::size_t t = 0; t < n; ++t) phi[t] = -phi[t];
        break;
      }
    }
    std::span<const double> ph(phi, n);
    out.eigenvalues[j] = energy_inner(op, ph, ph) / l2_inner(op, ph, ph);
  }
  // The Rayleigh refinement can reorder members of a tight cluster; keep ascending order.
  for (std::size_t j = 1; j < k; ++j) {
    std::size_t t = j;
    while (t > 0 && out.eigenvalues[t] < out.eigenvalues[t - 1]) {
      std::swap(out.eigenvalues[t], out.eigenvalues[t - 1]);
      std::swap_ranges(out.vectors.begin() + t * n, out.vectors.begin() + (t + 1) * n,
                       out.vectors.begin() + (t - 1) * n);
      --t;
    }
  }
  return out;
}

Vec SpectralData::coefficients(std::span<const double> u, std::size_t k) const {
  const std::size_t nn = n();
  if (u.size() != nn) throw InvalidInput("coefficients: size mismatch");
  k = std::min(k, count());
  Vec wu(nn);
  for (std::size_t i = 0; i < nn; ++i) wu[i] = op->mass[i] * u[i];
  Vec c(k);
  kernels::active().gemv_t(vectors.data(), nn, k, nn, wu.data(), c.data());
  return c;
}

Vec SpectralData::reconstruct(std::span<const double> c) const {
  if (c.size() > count()) throw InvalidInput("reconstruct: too many coefficients");
  Vec u(n());
  kernels::active().gemv_n(vectors.data(), n(), c.size(), n(), c.data(), u.data());
  return u;
}

SpectralSplit split(std::shared_ptr<const SpectralData> sd, std::size_t n_keep) {
  if (n_keep == 0 || n_keep > sd->count())
    throw InvalidInput("split: n_keep must lie in [1, number of eigenpairs]");
  SpectralSplit sp;
  sp.sd = sd;
  sp.n_keep = n_keep;
  sp.gap.lower = sd->eigenvalues[n_keep - 1];
  if (n_keep < sd->count()) {
    sp.gap.upper = sd->eigenvalues[n_keep];
    if (!(sp.gap.upper - sp.gap.lower > 1e-9 * std::abs(sp.gap.upper))) {
      std::ostringstream os;
      os << "split: eigenvalue tie at the cut (lambda_" << n_keep << " = " << sp.gap.lower
         << ", lambda_" << n_keep + 1 << " = " << sp.gap.upper << ")";
      throw InvalidInput(os.str());
    }
  } else {
    sp.gap.upper = std::numeric_limits<double>::infinity();
  }
  return sp;
}

Vec SpectralSplit::project(std::span<const double> u) const {
  const Vec c = sd->coefficients(u, n_keep);
  return sd->reconstruct(c);
}

Vec SpectralSplit::complement(std::span<const double> u) const {
  Vec q = project(u);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = u[i] - q[i];
  return q;
}

Vec semigroup_apply(const SpectralSplit& sp, double t, std::span<const double> u, Part part) {
  if (t < 0 && part != Part::plus)
    throw InvalidInput("semigroup_apply: negative time is only defined on Y");
  const SpectralData& sd = *sp.sd;
  std::size_t lo = 0, hi = sd.count();
  if (part == Part::plus) hi = sp.n_keep;
  if (part == Part::minus) lo = sp.n_keep;
  Vec c = sd.coefficients(u, hi);
  for (std::size_t j = 0; j < hi; ++j) c[j] = (j < lo) ? 0.0 : std::exp(-sd.eigenvalues[j] * t) * c[j];
  return sd.reconstruct(c);
}

Vec fractional_apply(const SpectralData& sd, double alpha, std::span<const double> u) {
  if (!(alpha > 0 && alpha <= 1)) throw InvalidInput("fractional_apply: alpha must lie in (0,1]");
  if (!sd.complete()) throw InvalidInput("fractional_apply: needs the complete eigenbasis");
  Vec c = sd.coefficients(u);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= std::pow(sd.eigenvalues[j], alpha);
  return sd.reconstruct(c);
}

double fractional_norm(const SpectralData& sd, double alpha, std::span<const double> u) {
  if (!(alpha > 0 && alpha <= 1)) throw InvalidInput("fractional_norm: alpha must lie in (0,1]");
  const Vec c = sd.coefficients(u);
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += std::pow(sd.eigenvalues[j], 2 * alpha) * c[j] * c[j];
  return std::sqrt(s);
}

}  // namespace alab
