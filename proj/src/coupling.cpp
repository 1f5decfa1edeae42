#include "alab/coupling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "alab/error.hpp"
#include "alab/kernels.hpp"
#include "alab/nonlinearity.hpp"

namespace alab {

Vec CouplingPair::lift(std::span<const double> u0) const {
  if (u0.size() != n_dim) throw InvalidInput("lift: wrong limit dimension");
  Vec out(size, 0.0);
  for (std::size_t k = 0; k < n_dim; ++k) kernels::axpy(u0[k], lift_basis[k], out);
  return out;
}

Vec CouplingPair::average(std::span<const double> u) const {
  if (u.size() != size) throw InvalidInput("average: wrong grid function length");
  Vec out(n_dim);
  for (std::size_t k = 0; k < n_dim; ++k) out[k] = kernels::dot(avg_weights[k], u);
  return out;
}

namespace {

// Trapezoid weights of the piecewise linear interpolant over [a, b] with the
// partial end cells closed by the nearest inner node (exact on constants).
Vec one_sided_average(const Grid& g, double a, double b) {
  Vec w(g.size(), 0.0);
  std::size_t first = 0;
  while (first < g.size() && g.nodes[first] < a - 1e-14) ++first;
  std::size_t last = first;
  while (last + 1 < g.size() && g.nodes[last + 1] <= b + 1e-14) ++last;
  for (std::size_t i = first; i < last; ++i) {
    w[i] += 0.5 * g.h;
    w[i + 1] += 0.5 * g.h;
  }
  w[first] += g.nodes[first] - a;
  w[last] += b - g.nodes[last];
  const double total = b - a;
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

std::vector<Vec> zone_probes(const OperatorDisc& op, const CouplingPair& cp) {
  // Nodes carrying no averaging weight form the transition zone.
  std::vector<Vec> out;
  Vec full(op.size(), 0.0), odd(op.size(), 0.0);
  std::size_t lo = op.size(), hi = 0;
  for (std::size_t i = 0; i < op.size(); ++i) {
    bool zone = true;
    for (const Vec& w : cp.avg_weights) zone = zone && w[i] == 0.0;
    if (zone) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  if (lo > hi) return out;
  const std::size_t mid = (lo + hi) / 2;
  for (std::size_t i = lo; i <= hi; ++i) {
    full[i] = 1.0;
    odd[i] = i < mid ? -1.0 : (i > mid ? 1.0 : 0.0);
  }
  for (Vec* g : {&full, &odd}) {
    const double nrm = l2_norm(op, *g);
    for (double& x : *g) x /= nrm;
    out.push_back(*g);
  }
  return out;
}

CouplingPair make_coupling(const OperatorDisc& op, const ProblemParams& prm) {
  CouplingPair cp;
  cp.tag = op.tag;
  cp.size = op.size();
  if (op.tag == ProblemTag::synthetic) {
    const LimitOperator L = limit_operator(ProblemTag::synthetic, prm);
    cp.n_dim = L.n_dim;
    for (std::size_t k = 0; k < cp.n_dim; ++k) {
      Vec e(cp.size, 0.0);
      e[k] = 1.0;
      cp.lift_basis.push_back(e);
      cp.avg_weights.push_back(e);
    }
    return cp;
  }
  const Grid& g = op.grid;
  if (op.tag == ProblemTag::homogenization) {
    cp.n_dim = 1;
    cp.lift_basis.push_back(Vec(cp.size, 1.0));
    cp.avg_weights.push_back(g.weights);
    return cp;
  }
  const double eps = op.epsilon;
  const double half = eps * prm.l1;
  const double cells = 2.0 * half / g.h;
  if (cells < 8.0) {
    std::ostringstream os;
    os << "localized coupling: transition [x1 - eps l1, x1 + eps l1] spans " << cells
       << " cells, need >= 8 (use n_cells >= " << static_cast<long>(std::ceil(8.0 / (2.0 * half)))
       << ")";
    throw InvalidInput(os.str());
  }
  const double zl = prm.x1 - half, zr = prm.x1 + half;
  if (zl <= 0 || zr >= 1) throw InvalidInput("localized coupling: transition leaves (0,1)");
  cp.n_dim = 2;
  Vec left(cp.size), right(cp.size);
  for (std::size_t i = 0; i < cp.size; ++i) {
    const double x = g.nodes[i];
    const double psi = std::clamp((zr - x) / (zr - zl), 0.0, 1.0);
    left[i] = psi;
    right[i] = 1.0 - psi;
  }
  cp.lift_basis = {left, right};
  cp.avg_weights = {one_sided_average(g, 0.0, zl), one_sided_average(g, zr, 1.0)};
  return cp;
}

ResolventGapResult resolvent_gap(const OperatorDisc& op, const SpectralData& sd,
                                 const LimitOperator& limit, const CouplingPair& cp,
                                 std::size_t spectral_probes, std::size_t random_probes,
                                 unsigned seed, std::size_t power_steps) {
  ResolventGapResult res;
  auto eval = [&](const Vec& g) {
    const Vec u = solve(op, g);
    const Vec w = cp.lift(limit.solve(cp.average(g)));
    Vec d(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - w[i];
    return energy_norm(op, d);
  };
  std::vector<double> values;
  const std::size_t ns = std::min(spectral_probes, sd.count());
  for (std::size_t j = 0; j < ns; ++j) values.push_back(eval(Vec(sd.vec(j).begin(), sd.vec(j).end())));
  // The localized family concentrates its gap in the transition zone, which
  // the averages ignore; zone indicators probe that directly.
  std::size_t nz = 0;
  if (cp.tag == ProblemTag::localized) {
    for (const Vec& g : zone_probes(op, cp)) {
      values.push_back(eval(g));
      ++nz;
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (std::size_t r = 0; r < random_probes; ++r) {
    Vec g(op.size());
    for (double& x : g) x = nd(rng);
    const double nrm = l2_norm(op, g);
    for (double& x : g) x /= nrm;
    values.push_back(eval(g));
  }
  res.probes = values.size();
  // Power refinement: g <- D^T A D g in the L2 (mass) inner product, started
  // from the best probe. Each iterate is itself a valid probe.
  if (power_steps > 0) {
    const std::size_t best = static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
    Vec g;
    if (best < ns) {
      g.assign(sd.vec(best).begin(), sd.vec(best).end());
    } else if (best < ns + nz) {
      g = zone_probes(op, cp)[best - ns];
    } else {
      std::mt19937_64 rng2(seed);
      std::normal_distribution<double> nd2;
      for (std::size_t r = 0; r <= best - ns - nz; ++r) {
        g.assign(op.size(), 0.0);
        for (double& x : g) x = nd2(rng2);
      }
      const double nrm = l2_norm(op, g);
      for (double& x : g) x /= nrm;
    }
    const std::size_t n = cp.n_dim;
    for (std::size_t it = 0; it < power_steps; ++it) {
      const Vec u = solve(op, g);
      const Vec w = cp.lift(limit.solve(cp.average(g)));
      Vec d(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - w[i];
      // y = A D g
      const Vec y = apply_op(op, d);
      // D^T y = A^{-1} y - M^* A0^{-1} E^* y
      Vec next = solve(op, y);
      Vec ey(n);
      for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += cp.lift_basis[k][i] * op.mass[i] * y[i];
        ey[k] = s / limit.weights[k];
      }
      // A0 is self-adjoint in the limit weights.
      const Vec a = limit.solve(ey);
      for (std::size_t i = 0; i < next.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += limit.weights[k] * a[k] * cp.avg_weights[k][i];
        next[i] -= s / op.mass[i];
      }
      const double nrm = l2_norm(op, next);
      if (!(nrm > 0)) break;
      for (double& x : next) x /= nrm;
      g = std::move(next);
      res.tau_hat = std::max(res.tau_hat, eval(g));
    }
    res.power_steps = power_steps;
  }
  // First half interleaves spectral and random probes proportionally.
  const std::size_t hs = ns / 2, hr = random_probes / 2;
  for (std::size_t i = 0; i < values.size(); ++i) {
    res.tau_hat = std::max(res.tau_hat, values[i]);
    bool in_half;
    if (i < ns)
      in_half = i < hs;
    else if (i < ns + nz)
      in_half = true;
    else
      in_half = i - ns - nz < hr;
    if (in_half) res.tau_half = std::max(res.tau_half, values[i]);
  }
  return res;
}

double resolvent_gap_exact(const SpectralData& sd, const LimitOperator& limit,
                           const CouplingPair& cp) {
  if (!sd.complete()) throw InvalidInput("resolvent_gap_exact needs the complete eigenbasis");
  const std::size_t N = sd.count(), n = cp.n_dim;
  // In coordinates where both norms are Euclidean:
  //   K = diag(lambda^{-1/2}) - U V^T,  U = Lambda^{1/2} P,  V^T = A0^{-1} m,
  // with P_{k,i} = <E e_i, phi_k> and m_{j,k} = (M phi_k)_j.
  Eigen::MatrixXd U(N, n), Vt(n, N);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec p = sd.coefficients(cp.lift_basis[i]);
    for (std::size_t k = 0; k < N; ++k) U(k, i) = std::sqrt(sd.eigenvalues[k]) * p[k];
  }
  for (std::size_t k = 0; k < N; ++k) {
    const Vec mk = cp.average(sd.vec(k));
    const Vec s = limit.solve(mk);
    for (std::size_t j = 0; j < n; ++j) Vt(j, k) = s[j];
  }
  Eigen::MatrixXd K = -U * Vt;
  for (std::size_t k = 0; k < N; ++k) K(k, k) += 1.0 / std::sqrt(sd.eigenvalues[k]);
  Eigen::MatrixXd KtK = K.transpose() * K;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(KtK, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double nonlinearity_gap(const OperatorDisc& op, const FSpec& f, const CouplingPair& cp,
                        std::span<const double> box_lo, std::span<const double> box_hi,
                        std::size_t samples_per_dim) {
  const std::size_t n = cp.n_dim;
  if (box_lo.size() != n || box_hi.size() != n) throw InvalidInput("nonlinearity_gap: box dimension");
  if (samples_per_dim < 2) samples_per_dim = 2;
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= samples_per_dim;
  double best = 0.0;
  Vec u0(n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t m = r % samples_per_dim;
      r /= samples_per_dim;
      u0[k] = box_lo[k] + (box_hi[k] - box_lo[k]) * m / (samples_per_dim - 1);
    }
    const Vec a = f.apply(cp.lift(u0));
    const Vec b = cp.lift(f.apply(u0));
    Vec d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    best = std::max(best, l2_norm(op, d));
  }
  return best;
}

double max_generalized_eig(const std::vector<double>& G, const std::vector<double>& w0,
                           std::size_t n) {
  Eigen::MatrixXd S(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) S(i, j) = G[i * n + j] / std::sqrt(w0[i] * w0[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double projection_gap(const SpectralSplit& sp, const LimitOperator& limit, const CouplingPair& cp) {
  if (sp.n_keep != cp.n_dim || limit.n_dim != cp.n_dim)
    throw InvalidInput("projection_gap: n_keep, limit and coupling dimensions differ");
  const std::size_t n = cp.n_dim;
  std::vector<Vec> D(n);
  for (std::size_t i = 0; i < n; ++i) D[i] = sp.complement(cp.lift_basis[i]);
  std::vector<double> G(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) G[i * n + j] = energy_inner(sp.op(), D[i], D[j]);
  return std::sqrt(std::max(0.0, max_generalized_eig(G, limit.weights, n)));
}

double norm_nonequivalence(const OperatorDisc& op, std::size_t cosine_probes,
                           std::size_t random_probes, unsigned seed) {
  const Grid& g = op.grid;
  if (g.size() != op.size()) throw InvalidInput("norm_nonequivalence needs a grid operator");
  auto ratio = [&](Vec u) {
    double mean = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) mean += g.weights[i] * u[i];
    for (double& x : u) x -= mean;
    double h1 = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) h1 += (u[i + 1] - u[i]) * (u[i + 1] - u[i]) / g.h;
    h1 += l2_inner(g, u, u);
    return energy_inner(op, u, u) / h1;
  };
  double best = 0.0;
  for (std::size_t k = 1; k <= cosine_probes; ++k) {
    Vec u(g.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::cos(k * std::numbers::pi * g.nodes[i]);
    best = std::max(best, ratio(u));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (std::size_t r = 0; r < random_probes; ++r) {
    // Random smooth field: a few random Fourier modes.
    Vec u(g.size(), 0.0);
    for (int k = 1; k <= 8; ++k) {
      const double a = nd(rng), b = nd(rng);
      for (std::size_t i = 0; i < u.size(); ++i)
        u[i] += (a * std::cos(k * std::numbers::pi * g.nodes[i]) +
                 b * std::sin(k * std::numbers::pi * g.nodes[i])) / k;
    }
    best = std::max(best, ratio(u));
  }
  return best;
}

}  // namespace alab
