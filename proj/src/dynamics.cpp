#include "alab/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <iomanip>
#include <sstream>

#include "alab/error.hpp"
#include "alab/kernels.hpp"

namespace alab {

// ------------------------------------------------------------- full system

Vec step_full(const SpectralData& sd, const FSpec& f, std::span<const double> u, double h,
              std::size_t substeps) {
  if (!sd.complete()) throw InvalidInput("step_full needs the complete eigenbasis");
  if (substeps == 0) throw InvalidInput("step_full: substeps must be positive");
  const std::size_t N = sd.n();
  const double tau = h / static_cast<double>(substeps);
  Vec decay(N), gain(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double lam = sd.eigenvalues[k];
    decay[k] = std::exp(-lam * tau);
    gain[k] = -std::expm1(-lam * tau) / lam;
  }
  Vec c = sd.coefficients(u);
  if (f.kind() == FSpec::Kind::zero) {
    for (std::size_t k = 0; k < N; ++k) c[k] *= std::pow(decay[k], static_cast<double>(substeps));
    return sd.reconstruct(c);
  }
  Vec uu(N), wf(N), fc(N);
  const auto& K = kernels::active();
  for (std::size_t s = 0; s < substeps; ++s) {
    K.gemv_n(sd.vectors.data(), N, N, N, c.data(), uu.data());
    for (std::size_t i = 0; i < N; ++i) wf[i] = sd.op->mass[i] * f(uu[i]);
    K.gemv_t(sd.vectors.data(), N, N, N, wf.data(), fc.data());
    K.exp_euler(decay.data(), gain.data(), fc.data(), c.data(), N);
  }
  return sd.reconstruct(c);
}

FullEquilibrium newton_full(const OperatorDisc& op, const FSpec& f, std::span<const double> u0,
                            double tol, std::size_t max_iter) {
  FullEquilibrium r;
  r.u.assign(u0.begin(), u0.end());
  const std::size_t N = op.size();
  const Vec sdiag = op.stiffness_diag();
  const Vec off = op.negated_conductance();
  auto residual = [&](const Vec& u) {
    Vec R = apply_op(op, u);
    for (std::size_t i = 0; i < N; ++i) R[i] -= f(u[i]);
    return R;
  };
  Vec R = residual(r.u);
  r.residual = l2_norm(op, R);
  const double scale = std::max(1.0, l2_norm(op, r.u));
  // The flux-form residual has a rounding floor near max(c_i / w_i) * eps_machine * |u|, which
  // exceeds tol on fine grids with large diffusion; a vanishing Newton step also counts.
  double last_step = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iter && r.residual > tol * scale && last_step > 1e-13 * scale;
       ++it) {
    Vec d(N), rhs(N);
    for (std::size_t i = 0; i < N; ++i) {
      d[i] = sdiag[i] - op.mass[i] * f.derivative(r.u[i]);
      rhs[i] = op.mass[i] * R[i];
    }
    const Vec du = tridiagonal_solve(d, off, rhs);
    last_step = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      r.u[i] -= du[i];
      last_step = std::max(last_step, std::abs(du[i]));
    }
    R = residual(r.u);
    r.residual = l2_norm(op, R);
    r.iterations = it + 1;
    if (!std::isfinite(r.residual)) break;
  }
  r.converged = std::isfinite(r.residual) &&
                (r.residual <= std::max(tol * scale, 1e-9) || last_step <= 1e-10 * scale);
  return r;
}

// ------------------------------------------------------------ fields on R^n

std::vector<double> jacobian(const VectorField& F, std::span<const double> z, double step) {
  const std::size_t n = F.n;
  std::vector<double> J(n * n);
  Vec zp(z.begin(), z.end()), zm(z.begin(), z.end());
  for (std::size_t j = 0; j < n; ++j) {
    const double hj = step * std::max(1.0, std::abs(z[j]));
    zp[j] = z[j] + hj;
    zm[j] = z[j] - hj;
    const Vec fp = F(zp), fm = F(zm);
    for (std::size_t i = 0; i < n; ++i) J[i * n + j] = (fp[i] - fm[i]) / (2 * hj);
    zp[j] = zm[j] = z[j];
  }
  return J;
}

VectorField limit_field(const LimitOperator& L, const FSpec& f) {
  auto ls = std::make_shared<LimitSpectrum>(limit_spectrum(L));
  auto w = std::make_shared<Vec>(L.weights);
  VectorField F;
  F.n = L.n_dim;
  F.eval = [ls, w, f](std::span<const double> z) {
    const std::size_t n = ls->n;
    Vec u(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) u[i] += ls->vectors[j * n + i] * z[j];
    Vec out(n);
    for (std::size_t j = 0; j < n; ++j) {
      double p = 0.0;
      for (std::size_t i = 0; i < n; ++i) p += (*w)[i] * f(u[i]) * ls->vectors[j * n + i];
      out[j] = -ls->eigenvalues[j] * z[j] + p;
    }
    return out;
  };
  return F;
}

ReducedField make_reduced_field(const GraphSection& s, const ManifoldSetup& ms, std::size_t pts) {
  const std::size_t n = ms.n();
  if (pts == 0) pts = n == 1 ? 129 : 65;
  ReducedField rf;
  rf.limit = limit_field(ms.limit, ms.f);
  rf.correction = zero_section(n, n, s.lo, s.hi, pts);
  rf.correction.epsilon = s.epsilon;
  for (std::size_t idx = 0; idx < rf.correction.nodes(); ++idx) {
    const Vec z = rf.correction.node_coords(idx);
    const Vec fr = reduced_rhs_z(s, ms, z);
    const Vec f0 = rf.limit(z);
    for (std::size_t k = 0; k < n; ++k) rf.correction.values[idx * n + k] = fr[k] - f0[k];
  }
  auto corr = std::make_shared<GraphSection>(rf.correction);
  const VectorField lim = rf.limit;
  rf.field.n = n;
  rf.field.eval = [corr, lim](std::span<const double> z) {
    Vec out = lim(z);
    const Vec c = corr->eval(z);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c[k];
    return out;
  };
  return rf;
}

Vec flow(const VectorField& F, std::span<const double> z0, double T, double dt) {
  const std::size_t n = F.n;
  Vec z(z0.begin(), z0.end()), tmp(n);
  const std::size_t steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  for (std::size_t s = 0; s < steps; ++s) {
    const double h = std::min(dt, T - s * dt);
    const Vec k1 = F(z);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
    const Vec k2 = F(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
    const Vec k3 = F(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + h * k3[i];
    const Vec k4 = F(tmp);
    for (std::size_t i = 0; i < n; ++i) z[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return z;
}

Map time_one_map(const VectorField& F, double dt) {
  return [F, dt](std::span<const double> z) { return flow(F, z, 1.0, dt); };
}

double weighted_norm(std::span<const double> x, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i] * x[i];
  return std::sqrt(s);
}

double map_sup_gap(const Map& S1, const Map& S2, std::span<const double> lo,
                   std::span<const double> hi, std::span<const double> weights,
                   std::size_t pts) {
  const std::size_t n = lo.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= pts;
  double gap = 0.0;
  Vec z(n), d(n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (std::size_t k = 0; k < n; ++k) {
      z[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(r % pts) / static_cast<double>(pts - 1);
      r /= pts;
    }
    const Vec a = S1(z), b = S2(z);
    for (std::size_t k = 0; k < n; ++k) d[k] = a[k] - b[k];
    gap = std::max(gap, weighted_norm(d, weights));
  }
  return gap;
}

// ------------------------------------------------------------- equilibria

bool EquilibriumSet::all_hyperbolic() const {
  return std::all_of(points.begin(), points.end(), [](const Equilibrium& e) { return e.hyperbolic; });
}

namespace {

bool newton_rn(const VectorField& F, Vec& z, double& res) {
  const std::size_t n = F.n;
  for (int it = 0; it < 60; ++it) {
    const Vec r = F(z);
    res = 0.0;
    for (double v : r) res = std::max(res, std::abs(v));
    if (!std::isfinite(res)) return false;
    if (res < 1e-12) return true;
    const auto J = jacobian(F, z);
    Eigen::MatrixXd Jm(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      b(i) = r[i];
      for (std::size_t j = 0; j < n; ++j) Jm(i, j) = J[i * n + j];
    }
    const Eigen::VectorXd dz = Jm.fullPivLu().solve(b);
    double step = dz.norm();
    const double cap = 0.5 * std::max(1.0, Eigen::Map<const Eigen::VectorXd>(z.data(), n).norm());
    const double scale = step > cap ? cap / step : 1.0;
    for (std::size_t i = 0; i < n; ++i) z[i] -= scale * dz(i);
    if (step * scale < 1e-15) break;
  }
  const Vec r = F(z);
  res = 0.0;
  for (double v : r) res = std::max(res, std::abs(v));
  return res < 1e-10;
}

void classify(const VectorField& F, Equilibrium& e) {
  const std::size_t n = F.n;
  const auto J = jacobian(F, e.z);
  Eigen::MatrixXd Jm(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) Jm(i, j) = J[i * n + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(Jm);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return es.eigenvalues()(a).real() < es.eigenvalues()(b).real();
  });
  e.eig_re.clear();
  e.eig_im.clear();
  e.unstable_dirs.clear();
  e.unstable_dim = 0;
  e.hyperbolic = true;
  for (std::size_t i : order) {
    const auto mu = es.eigenvalues()(i);
    e.eig_re.push_back(mu.real());
    e.eig_im.push_back(mu.imag());
    if (std::abs(mu.real()) <= 1e-6) e.hyperbolic = false;
    if (mu.real() > 0) {
      ++e.unstable_dim;
      if (std::abs(mu.imag()) < 1e-12) {
        Vec v(n);
        double nv = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          v[k] = es.eigenvectors()(k, i).real();
          nv += v[k] * v[k];
        }
        nv = std::sqrt(nv);
        for (auto& x : v) x /= nv;
        e.unstable_dirs.push_back(v);
      }
    }
  }
}

}  // namespace

EquilibriumSet find_equilibria(const VectorField& F, std::span<const double> lo,
                               std::span<const double> hi, std::size_t seeds_per_dim) {
  const std::size_t n = F.n;
  EquilibriumSet out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= seeds_per_dim;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vec z(n);
    std::size_t r = idx;
    for (std::size_t k = 0; k < n; ++k) {
      z[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(r % seeds_per_dim) /
                         static_cast<double>(seeds_per_dim - 1);
      r /= seeds_per_dim;
    }
    double res = 0.0;
    if (!newton_rn(F, z, res)) {
      ++out.seeds_failed;
      continue;
    }
    bool dup = false;
    for (const auto& e : out.points) {
      double d = 0.0;
      for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(e.z[k] - z[k]));
      if (d < 1e-6) dup = true;
    }
    if (dup) continue;
    Equilibrium e;
    e.z = z;
    e.residual = res;
    out.points.push_back(std::move(e));
  }
  for (auto& e : out.points) classify(F, e);
  std::sort(out.points.begin(), out.points.end(),
            [](const Equilibrium& a, const Equilibrium& b) { return a.z < b.z; });
  return out;
}

EquilibriumDistance equilibrium_rate(std::span<const double> u0_star, const OperatorDisc& op,
                                     const CouplingPair& cp, const FSpec& f) {
  EquilibriumDistance r;
  r.u0.assign(u0_star.begin(), u0_star.end());
  const Vec seed = cp.lift(u0_star);
  const FullEquilibrium eq = newton_full(op, f, seed);
  r.converged = eq.converged;
  r.residual = eq.residual;
  Vec d(seed.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = eq.u[i] - seed[i];
  r.distance = energy_norm(op, d);
  return r;
}

std::string equilibria_csv(const EquilibriumSet& eq) {
  std::ostringstream os;
  os << "# equilibria v1: vectors are ';'-joined\n";
  os << "index,z,eig_re,eig_im,unstable_dim,hyperbolic,residual\n";
  os << std::setprecision(12);
  auto join = [&](const Vec& v) {
    std::ostringstream s;
    s << std::setprecision(12);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ";" : "") << v[i];
    return s.str();
  };
  for (std::size_t i = 0; i < eq.points.size(); ++i) {
    const auto& e = eq.points[i];
    os << i << "," << join(e.z) << "," << join(e.eig_re) << "," << join(e.eig_im) << ","
       << e.unstable_dim << "," << (e.hyperbolic ? 1 : 0) << "," << e.residual << "\n";
  }
  return os.str();
}

}  // namespace alab
