#include "alab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "alab/error.hpp"
#include "alab/kernels.hpp"

namespace alab {

ManifoldSetup make_manifold_setup(SpectralSplit sp, LimitOperator limit, CouplingPair cp, FSpec f,
                                  std::size_t tail) {
  ManifoldSetup ms;
  ms.iso = make_isomorphism(sp, limit, cp);
  ms.sp = std::move(sp);
  ms.limit = std::move(limit);
  ms.cp = std::move(cp);
  ms.f = f;
  ms.tail = std::min(tail, ms.sp.sd->count() - ms.sp.n_keep);
  return ms;
}

// ---------------------------------------------------------------- sections

std::size_t GraphSection::nodes() const {
  std::size_t t = 1;
  for (std::size_t k = 0; k < n; ++k) t *= pts;
  return t;
}

Vec GraphSection::node_coords(std::size_t idx) const {
  Vec z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = idx % pts;
    idx /= pts;
    z[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(i) / static_cast<double>(pts - 1);
  }
  return z;
}

bool GraphSection::inside(std::span<const double> z, double factor) const {
  for (std::size_t k = 0; k < n; ++k) {
    const double c = 0.5 * (lo[k] + hi[k]), hw = 0.5 * (hi[k] - lo[k]) * factor;
    if (std::abs(z[k] - c) > hw) return false;
  }
  return true;
}

void GraphSection::eval_into(std::span<const double> z, double* out) const {
  std::fill(out, out + m, 0.0);
  if (m == 0) return;
  std::size_t base[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  std::size_t stride = 1;
  std::size_t offset = 0;
  std::size_t strides[2] = {1, pts};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = std::clamp((z[k] - lo[k]) / (hi[k] - lo[k]), 0.0, 1.0) * (pts - 1);
    std::size_t i = static_cast<std::size_t>(std::floor(t));
    if (i >= pts - 1) i = pts - 2;
    base[k] = i;
    frac[k] = t - static_cast<double>(i);
    offset += i * stride;
    stride *= pts;
  }
  const std::size_t corners = std::size_t{1} << n;
  for (std::size_t cidx = 0; cidx < corners; ++cidx) {
    double w = 1.0;
    std::size_t node = offset;
    for (std::size_t k = 0; k < n; ++k) {
      const bool up = (cidx >> k) & 1u;
      w *= up ? frac[k] : 1.0 - frac[k];
      if (up) node += strides[k];
    }
    if (w == 0.0) continue;
    kernels::active().axpy(w, values.data() + node * m, out, m);
  }
  (void)base;
}

Vec GraphSection::eval(std::span<const double> z) const {
  Vec out(m);
  eval_into(z, out.data());
  return out;
}

GraphSection zero_section(std::size_t n, std::size_t m, std::span<const double> lo,
                          std::span<const double> hi, std::size_t pts) {
  if (n < 1 || n > 2) throw InvalidInput("graph sections support 1 or 2 dimensions");
  if (pts < 2) throw InvalidInput("graph section needs at least 2 points per dimension");
  GraphSection s;
  s.n = n;
  s.m = m;
  s.pts = pts;
  s.lo.assign(lo.begin(), lo.end());
  s.hi.assign(hi.begin(), hi.end());
  for (std::size_t k = 0; k < n; ++k)
    if (!(s.hi[k] > s.lo[k])) throw InvalidInput("graph section box has empty extent");
  s.values.assign(s.nodes() * m, 0.0);
  return s;
}

double tail_energy_norm(const ManifoldSetup& ms, std::span<const double> s) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += ms.sp.lambda(ms.n() + k) * s[k] * s[k];
  return std::sqrt(acc);
}

void refresh_norms(const ManifoldSetup& ms, GraphSection& s) {
  s.sup_norm = 0.0;
  s.lip_bound = 0.0;
  const std::size_t N = s.nodes();
  Vec diff(s.m);
  for (std::size_t idx = 0; idx < N; ++idx) {
    s.sup_norm = std::max(s.sup_norm, tail_energy_norm(ms, s.node_values(idx)));
    std::size_t stride = 1, rem = idx;
    for (std::size_t k = 0; k < s.n; ++k) {
      const std::size_t i = rem % s.pts;
      rem /= s.pts;
      if (i + 1 < s.pts) {
        const std::size_t nb = idx + stride;
        for (std::size_t t = 0; t < s.m; ++t) diff[t] = s.values[nb * s.m + t] - s.values[idx * s.m + t];
        Vec dz(s.n, 0.0);
        dz[k] = (s.hi[k] - s.lo[k]) / static_cast<double>(s.pts - 1);
        const Vec dc = ms.iso.to_eigen(dz);
        double yn = 0.0;
        for (std::size_t j = 0; j < s.n; ++j) yn += ms.sp.lambda(j) * dc[j] * dc[j];
        s.lip_bound = std::max(s.lip_bound, tail_energy_norm(ms, diff) / std::sqrt(yn));
      }
      stride *= s.pts;
    }
  }
}

double section_distance(const ManifoldSetup& ms, const GraphSection& a, const GraphSection& b) {
  if (a.values.size() != b.values.size()) throw InvalidInput("section_distance: grids differ");
  double d = 0.0;
  Vec diff(a.m);
  for (std::size_t idx = 0; idx < a.nodes(); ++idx) {
    for (std::size_t t = 0; t < a.m; ++t) diff[t] = a.values[idx * a.m + t] - b.values[idx * a.m + t];
    d = std::max(d, tail_energy_norm(ms, diff));
  }
  return d;
}

// --------------------------------------------------------------- constants

bool ManifoldConstants::all_hold() const {
  return std::all_of(inequalities.begin(), inequalities.end(), [](const Inequality& q) { return q.holds; });
}

const Inequality* ManifoldConstants::first_failure() const {
  for (const auto& q : inequalities)
    if (!q.holds) return &q;
  return nullptr;
}

ManifoldConstants evaluate_constants(double beta, double gamma, double rho, double M, double Delta) {
  ManifoldConstants mc;
  mc.beta = beta;
  mc.gamma = gamma;
  mc.rho_f = rho;
  mc.M = M;
  mc.Delta = Delta;
  mc.D = 2.0 * rho * M / beta;
  const double den1 = beta - gamma - rho * M * (1.0 + Delta);
  const double den0 = beta - gamma - rho * M;
  auto add = [&](std::string name, double lhs, double rhs, bool strict) {
    const bool ok = std::isfinite(lhs) && (strict ? lhs < rhs : lhs <= rhs);
    mc.inequalities.push_back({std::move(name), lhs, rhs, ok});
  };
  add("rho M / beta <= D", rho * M / beta, mc.D, false);
  add("beta - gamma - rho M (1 + Delta) > 0", -den1, 0.0, true);
  add("beta - gamma - rho M > 0", -den0, 0.0, true);
  const double inf = std::numeric_limits<double>::infinity();
  const double q3 = den1 > 0 ? rho * M * M * (1.0 + Delta) / den1 : inf;
  add("rho M^2 (1 + Delta) / (beta - gamma - rho M (1 + Delta)) <= Delta", q3, Delta, false);
  const double q4 = den1 > 0 ? rho * M / beta + rho * rho * M * M * (1.0 + Delta) / gamma / den1 : inf;
  mc.contraction = q4;
  add("rho M / beta + rho^2 M^2 (1 + Delta) / (gamma (beta - gamma - rho M (1 + Delta))) <= 1/2",
      q4, 0.5, false);
  const double q5 = den0 > 0 ? rho * M / beta + rho * rho * M * M / gamma / den0 : inf;
  add("rho M / beta + rho^2 M^2 / (gamma (beta - gamma - rho M)) < 1", q5, 1.0, true);
  mc.L = den1 > 0 ? rho * M + rho * rho * M * M * (1.0 + Delta) * (1.0 + M) / den1 : inf;
  add("L < beta", mc.L, beta, true);
  return mc;
}

ManifoldConstants check_constants(const SpectralSplit& sp, const LimitOperator& limit, double rho_f,
                                  double delta, double Delta) {
  const LimitSpectrum ls = limit_spectrum(limit);
  const double gamma = ls.eigenvalues.back() + delta;
  const double beta = sp.gap.upper;
  ManifoldConstants mc = evaluate_constants(beta, gamma, rho_f, 1.0, Delta);
  if (const Inequality* bad = mc.first_failure()) {
    std::ostringstream os;
    os << "epsilon not in manifold regime: '" << bad->name << "' fails (lhs " << bad->lhs
       << ", rhs " << bad->rhs << ", beta " << beta << ", gamma " << gamma << ", rho_f " << rho_f
       << ")";
    throw RegimeError(os.str());
  }
  return mc;
}

double local_rho_f(const ManifoldSetup& ms, std::span<const double> lo, std::span<const double> hi) {
  const std::size_t n = ms.n();
  double U = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    Vec z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = ((corner >> k) & 1u) ? hi[k] : lo[k];
    for (double v : ms.iso.to_limit(z)) U = std::max(U, std::abs(v));
  }
  return ms.f.local_bound(U);
}

TransformParams transform_params(const ManifoldConstants& mc, double lambda_n, double tol) {
  TransformParams tp;
  tp.tol = tol;
  tp.h = std::min(0.01, 0.1 / lambda_n);
  if (mc.rho_f > 0) {
    tp.T_h = std::log(mc.rho_f * mc.M * 10.0 / (mc.beta * tol)) / mc.beta;
    tp.T_h = std::max(tp.T_h, tp.h);
  } else {
    tp.T_h = tp.h;
  }
  tp.steps = static_cast<std::size_t>(std::ceil(tp.T_h / tp.h - 1e-9));
  tp.T_h = tp.steps * tp.h;
  return tp;
}

// ---------------------------------------------------------- graph transform

namespace {

// Scratch buffers and evaluation of f at v + s(v) for one worker.
struct Evaluator {
  const ManifoldSetup& ms;
  const GraphSection& s;
  Vec coef, u, wf, proj;
  double excursion = 0.0;

  Evaluator(const ManifoldSetup& m_, const GraphSection& s_)
      : ms(m_), s(s_), coef(m_.n() + m_.m()), u(m_.sd().n()), wf(m_.sd().n()), proj(m_.n() + m_.m()) {}

  // Sets proj[0..ncols) to the eigen-coefficients of f(v + s(v)).
  void eval(std::span<const double> c, std::size_t ncols, double exit_factor) {
    const std::size_t n = ms.n(), m = ms.m();
    const Vec z = ms.iso.from_eigen(c);
    for (std::size_t k = 0; k < n; ++k) {
      const double ctr = 0.5 * (s.lo[k] + s.hi[k]), hw = 0.5 * (s.hi[k] - s.lo[k]);
      excursion = std::max(excursion, std::abs(z[k] - ctr) / hw);
    }
    if (excursion > exit_factor) {
      std::ostringstream os;
      os << "backward solution exits " << exit_factor
         << "x the domain box (relative excursion " << excursion << "); enlarge the box";
      throw RegimeError(os.str());
    }
    std::copy(c.begin(), c.end(), coef.begin());
    s.eval_into(z, coef.data() + n);
    const SpectralData& sd = ms.sd();
    const std::size_t N = sd.n();
    kernels::active().gemv_n(sd.vectors.data(), N, n + m, N, coef.data(), u.data());
    for (std::size_t i = 0; i < N; ++i) wf[i] = sd.op->mass[i] * ms.f(u[i]);
    kernels::active().gemv_t(sd.vectors.data(), N, ncols, N, wf.data(), proj.data());
  }

  // Dropped-mode bound ||(I - Q_{n+m}) f||_{L2} / sqrt(lambda_{n+m}).
  double tail_bound() const {
    const SpectralData& sd = ms.sd();
    const std::size_t kept = ms.n() + ms.m();
    if (kept >= sd.count()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < wf.size(); ++i) total += wf[i] * wf[i] / sd.op->mass[i];
    double captured = 0.0;
    for (std::size_t j = 0; j < kept; ++j) captured += proj[j] * proj[j];
    return std::sqrt(std::max(0.0, total - captured) / sd.eigenvalues[kept]);
  }
};

// Exact integrals of e^{-lambda s} times the linear hat functions on [0, h].
void exp_trapezoid_weights(double lambda, double h, double& a, double& b) {
  const double x = lambda * h;
  if (x < 1e-3) {
    a = h * (0.5 - x / 6.0 + x * x / 24.0);
    b = h * (0.5 - x / 3.0 + x * x / 8.0);
    return;
  }
  const double em = std::exp(-x);
  const double phi1 = -std::expm1(-x) / x;
  b = h * (-std::expm1(-x) - x * em) / (x * x);
  a = h * phi1 - b;
}

}  // namespace

GraphSection graph_transform_step(const GraphSection& s, const ManifoldSetup& ms,
                                  const TransformParams& tp, TransformDiagnostics* diag) {
  const std::size_t n = ms.n(), m = ms.m();
  if (s.m != m || s.n != n) throw InvalidInput("graph_transform_step: section shape mismatch");
  GraphSection out = s;
  const std::size_t K = tp.steps;
  const double h = tp.h;

  // Quadrature weights per tail mode.
  Vec qa(m), qb(m), decay(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double lam = ms.sp.lambda(n + j);
    exp_trapezoid_weights(lam, h, qa[j], qb[j]);
    decay[j] = std::exp(-lam * h);
  }
  Vec lam_y(n);
  for (std::size_t j = 0; j < n; ++j) lam_y[j] = ms.sp.lambda(j);

  const std::size_t N = s.nodes();
  unsigned threads = tp.threads ? tp.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, N));
  std::vector<double> tail_est(threads, 0.0), excursion(threads, 0.0);
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto work = [&](unsigned tid) {
    try {
      Evaluator ev(ms, s);
      Vec c(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
      Vec G_prev(m), G_next(m), acc(m), weight(m);
      auto rhs = [&](const Vec& cc, Vec& out_d, bool full) {
        ev.eval(cc, full ? n + m : n, tp.exit_factor);
        // Backward time: d c / d(-t) = lambda c - H.
        for (std::size_t j = 0; j < n; ++j) out_d[j] = lam_y[j] * cc[j] - ev.proj[j];
      };
      for (std::size_t idx = tid; idx < N; idx += threads) {
        const Vec z0 = s.node_coords(idx);
        c = ms.iso.to_eigen(z0);
        std::fill(acc.begin(), acc.end(), 0.0);
        std::fill(weight.begin(), weight.end(), 1.0);
        rhs(c, k1, true);
        tail_est[tid] = std::max(tail_est[tid], ev.tail_bound());
        std::copy(ev.proj.begin() + n, ev.proj.begin() + n + m, G_prev.begin());
        for (std::size_t step = 0; step < K; ++step) {
          for (std::size_t j = 0; j < n; ++j) tmp[j] = c[j] + 0.5 * h * k1[j];
          rhs(tmp, k2, false);
          for (std::size_t j = 0; j < n; ++j) tmp[j] = c[j] + 0.5 * h * k2[j];
          rhs(tmp, k3, false);
          for (std::size_t j = 0; j < n; ++j) tmp[j] = c[j] + h * k3[j];
          rhs(tmp, k4, false);
          for (std::size_t j = 0; j < n; ++j) c[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
          rhs(c, k1, true);
          std::copy(ev.proj.begin() + n, ev.proj.begin() + n + m, G_next.begin());
          for (std::size_t j = 0; j < m; ++j) {
            acc[j] += weight[j] * (qa[j] * G_prev[j] + qb[j] * G_next[j]);
            weight[j] *= decay[j];
          }
          std::swap(G_prev, G_next);
        }
        std::copy(acc.begin(), acc.end(), out.values.begin() + idx * m);
      }
      excursion[tid] = ev.excursion;
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (diag) {
    diag->tail_estimate = *std::max_element(tail_est.begin(), tail_est.end());
    diag->max_excursion = *std::max_element(excursion.begin(), excursion.end());
  }
  refresh_norms(ms, out);
  return out;
}

FixedPointResult solve_fixed_point(const GraphSection& s0, const ManifoldSetup& ms,
                                   const TransformParams& tp, std::size_t max_iter) {
  FixedPointResult r;
  GraphSection cur = s0;
  int growth = 0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    TransformDiagnostics d;
    GraphSection next = graph_transform_step(cur, ms, tp, &d);
    const double inc = section_distance(ms, next, cur);
    if (!r.increments.empty() && inc > r.increments.back()) {
      if (++growth >= 3) {
        std::ostringstream os;
        os << "graph transform is not contracting: increments grew 3 times in a row (last " << inc
           << ")";
        throw ConvergenceError(os.str());
      }
    } else {
      growth = 0;
    }
    r.increments.push_back(inc);
    r.diag.tail_estimate = std::max(r.diag.tail_estimate, d.tail_estimate);
    r.diag.max_excursion = std::max(r.diag.max_excursion, d.max_excursion);
    cur = std::move(next);
    r.iterations = it;
    r.last_increment = inc;
    if (inc <= tp.tol) {
      r.section = cur;
      return r;
    }
  }
  std::ostringstream os;
  os << "graph transform did not reach tol " << tp.tol << " in " << max_iter
     << " iterations (last increment " << r.last_increment << ")";
  throw ConvergenceError(os.str());
}

// ------------------------------------------------------------ reduced flow

Vec lift_point(const ManifoldSetup& ms, std::span<const double> c, std::span<const double> s) {
  Vec coef(c.begin(), c.end());
  coef.insert(coef.end(), s.begin(), s.end());
  return ms.sd().reconstruct(coef);
}

Vec reduced_rhs(const GraphSection& s, const ManifoldSetup& ms, std::span<const double> c) {
  const Vec z = ms.iso.from_eigen(c);
  if (!s.inside(z, 1.0 + 1e-9)) throw InvalidInput("reduced_rhs: point outside the section box");
  const Vec u = lift_point(ms, c, s.eval(z));
  const Vec F = ms.f.apply(u);
  const Vec H = ms.sd().coefficients(F, ms.n());
  Vec out(ms.n());
  for (std::size_t j = 0; j < ms.n(); ++j) out[j] = -ms.sp.lambda(j) * c[j] + H[j];
  return out;
}

Vec reduced_rhs_z(const GraphSection& s, const ManifoldSetup& ms, std::span<const double> z) {
  return ms.iso.from_eigen(reduced_rhs(s, ms, ms.iso.to_eigen(z)));
}

// --------------------------------------------------------------- text I/O

void write_section(std::ostream& os, const GraphSection& s) {
  os << "# graph_section v1: header lines then one row per node: z_1..z_n s_1..s_m\n";
  os << std::setprecision(17);
  os << "epsilon " << s.epsilon << "\n";
  os << "shape " << s.n << " " << s.m << " " << s.pts << "\n";
  os << "lo";
  for (double v : s.lo) os << " " << v;
  os << "\nhi";
  for (double v : s.hi) os << " " << v;
  os << "\nnorms " << s.sup_norm << " " << s.lip_bound << "\n";
  for (std::size_t idx = 0; idx < s.nodes(); ++idx) {
    const Vec z = s.node_coords(idx);
    for (std::size_t k = 0; k < s.n; ++k) os << (k ? " " : "") << z[k];
    for (double v : s.node_values(idx)) os << " " << v;
    os << "\n";
  }
}

GraphSection read_section(std::istream& is) {
  GraphSection s;
  std::string line, key;
  std::getline(is, line);
  if (line.rfind("# graph_section v1", 0) != 0) throw InvalidInput("not a graph_section v1 stream");
  is >> key >> s.epsilon;
  is >> key >> s.n >> s.m >> s.pts;
  if (key != "shape" || s.n < 1 || s.n > 2) throw InvalidInput("bad graph_section shape line");
  s.lo.resize(s.n);
  s.hi.resize(s.n);
  is >> key;
  for (auto& v : s.lo) is >> v;
  is >> key;
  for (auto& v : s.hi) is >> v;
  is >> key >> s.sup_norm >> s.lip_bound;
  s.values.resize(s.nodes() * s.m);
  double skip;
  for (std::size_t idx = 0; idx < s.nodes(); ++idx) {
    for (std::size_t k = 0; k < s.n; ++k) is >> skip;
    for (std::size_t t = 0; t < s.m; ++t) is >> s.values[idx * s.m + t];
  }
  if (!is) throw InvalidInput("truncated graph_section stream");
  return s;
}

}  // namespace alab
