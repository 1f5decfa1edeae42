#include "alab/shadowing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "alab/error.hpp"

namespace alab {

std::vector<double> DiscreteMap::jacobian(std::span<const double> x, double step) const {
  if (jac) return jac(x);
  std::vector<double> J(n * n);
  Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (std::size_t j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const Vec fp = T(xp), fm = T(xm);
    for (std::size_t i = 0; i < n; ++i) J[i * n + j] = (fp[i] - fm[i]) / (2 * h);
    xp[j] = xm[j] = x[j];
  }
  return J;
}

double DiscreteMap::norm(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (weights.empty() ? 1.0 : weights[i]) * x[i] * x[i];
  return std::sqrt(s);
}

DiscreteMap make_map(std::size_t n, Map T, Vec lo, Vec hi, Vec weights) {
  DiscreteMap m;
  m.n = n;
  m.T = std::move(T);
  m.lo = std::move(lo);
  m.hi = std::move(hi);
  m.weights = std::move(weights);
  return m;
}

double defect(const DiscreteMap& map, const std::vector<Vec>& seq) {
  if (seq.size() < 2) throw InvalidInput("defect: sequence needs at least two points");
  double d = 0.0;
  Vec diff(map.n);
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    const Vec tx = map.T(seq[k]);
    for (std::size_t i = 0; i < map.n; ++i) diff[i] = tx[i] - seq[k + 1][i];
    d = std::max(d, map.norm(diff));
  }
  return d;
}

namespace {

Eigen::MatrixXd to_matrix(const std::vector<double>& J, std::size_t n) {
  Eigen::MatrixXd M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = J[i * n + j];
  return M;
}

// Rows of the spectral coordinate map selecting the stable (|mu| < 1) or unstable part.
Eigen::MatrixXd splitting_rows(const Eigen::MatrixXd& J, bool stable) {
  const std::size_t n = J.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(J);
  const Eigen::MatrixXcd Vinv = es.eigenvectors().inverse();
  std::vector<Eigen::RowVectorXd> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto mu = es.eigenvalues()(i);
    if ((std::abs(mu) < 1.0) != stable) continue;
    if (std::abs(mu.imag()) < 1e-12) {
      rows.push_back(Vinv.row(i).real());
    } else if (mu.imag() > 0) {
      rows.push_back(Vinv.row(i).real());
      rows.push_back(Vinv.row(i).imag());
    }
  }
  Eigen::MatrixXd P(rows.size(), n);
  for (std::size_t r = 0; r < rows.size(); ++r) P.row(r) = rows[r];
  return P;
}

}  // namespace

ShadowResult shadow(const DiscreteMap& map, const std::vector<Vec>& x, double tol,
                    std::size_t max_iter) {
  const std::size_t n = map.n;
  if (x.size() < 2) throw InvalidInput("shadow: pseudo-trajectory needs at least two points");
  const std::size_t K = x.size() - 1;
  const Eigen::MatrixXd Ps = splitting_rows(to_matrix(map.jacobian(x.front()), n), true);
  const Eigen::MatrixXd Pu = splitting_rows(to_matrix(map.jacobian(x.back()), n), false);
  const std::size_t ds = Ps.rows(), du = Pu.rows();
  ShadowResult r;
  // With ds + du != n (for instance a segment leaving an expanding region) the end conditions
  // over- or under-determine the correction; Newton then takes the minimum-norm least-squares step.
  const std::size_t N = (K + 1) * n, rows = ds + K * n + du;
  const bool square = rows == N;
  const double pin = square ? 1.0 : 1e-3;  // soft end conditions when overdetermined
  std::vector<Vec> y = x;
  Eigen::VectorXd F(rows);
  auto eval_F = [&]() {
    Eigen::VectorXd d0(n), dK(n);
    for (std::size_t i = 0; i < n; ++i) {
      d0(i) = y[0][i] - x[0][i];
      dK(i) = y[K][i] - x[K][i];
    }
    F.head(ds) = pin * (Ps * d0);
    for (std::size_t k = 0; k < K; ++k) {
      const Vec ty = map.T(y[k]);
      for (std::size_t i = 0; i < n; ++i) F(ds + k * n + i) = y[k + 1][i] - ty[i];
    }
    F.tail(du) = pin * (Pu * dK);
  };
  eval_F();
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double res = F.segment(ds, K * n).cwiseAbs().maxCoeff();
    if (!std::isfinite(res)) break;
    if (res <= tol) {
      r.converged = true;
      break;
    }
    Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(rows, N);
    Jm.block(0, 0, ds, n) = pin * Ps;
    for (std::size_t k = 0; k < K; ++k) {
      const Eigen::MatrixXd Jk = to_matrix(map.jacobian(y[k]), n);
      Jm.block(ds + k * n, k * n, n, n) = -Jk;
      Jm.block(ds + k * n, (k + 1) * n, n, n) += Eigen::MatrixXd::Identity(n, n);
    }
    Jm.block(ds + K * n, K * n, du, n) = pin * Pu;
    const Eigen::VectorXd dy =
        square ? Eigen::VectorXd(Jm.partialPivLu().solve(F))
               : Eigen::VectorXd(Jm.completeOrthogonalDecomposition().solve(F));
    if (!dy.allFinite()) break;
    for (std::size_t k = 0; k <= K; ++k)
      for (std::size_t i = 0; i < n; ++i) y[k][i] -= dy(k * n + i);
    r.iterations = it + 1;
    eval_F();
  }
  if (!r.converged && F.allFinite() && F.segment(ds, K * n).cwiseAbs().maxCoeff() <= tol)
    r.converged = true;
  r.orbit = y;
  r.residual = defect(map, y);
  Vec diff(n);
  for (std::size_t k = 0; k <= K; ++k) {
    for (std::size_t i = 0; i < n; ++i) diff[i] = y[k][i] - x[k][i];
    r.distance = std::max(r.distance, map.norm(diff));
  }
  if (!r.converged) r.message = "no shadowing orbit found at this tolerance";
  return r;
}

bool hyperbolic_fixed_points(const DiscreteMap& map, const std::vector<Vec>& fixed_points,
                             double margin) {
  for (const auto& p : fixed_points) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_matrix(map.jacobian(p), map.n));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(std::abs(es.eigenvalues()(i)) - 1.0) <= margin) return false;
  }
  return true;
}

std::string LpspEstimate::to_csv() const {
  std::ostringstream os;
  os << "# lpsp_trials v1\ntrial,defect,shadow_distance,ratio,converged\n" << std::setprecision(12);
  for (const auto& t : log)
    os << t.id << "," << t.defect << "," << t.distance << "," << t.ratio << "," << (t.converged ? 1 : 0) << "\n";
  return os.str();
}

LpspEstimate lpsp_estimate(const DiscreteMap& map, const std::vector<Vec>& fixed_points,
                           std::size_t trials, double delta0, unsigned seed, std::size_t segment) {
  if (!hyperbolic_fixed_points(map, fixed_points))
    throw RegimeError("lpsp_estimate: a fixed point is not hyperbolic");
  const std::size_t n = map.n;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto direction = [&]() {
    Vec d(n);
    for (auto& v : d) v = gauss(rng);
    const double nd = map.norm(d);
    for (auto& v : d) v /= nd;
    return d;
  };
  LpspEstimate est;
  est.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    Vec x0(n);
    for (std::size_t i = 0; i < n; ++i) x0[i] = map.lo[i] + (map.hi[i] - map.lo[i]) * uni(rng);
    const double delta = delta0 * (0.1 + 0.9 * uni(rng));
    const bool persistent = t % 2 == 1;
    Vec dir = direction();
    std::vector<Vec> seq{x0};
    for (std::size_t k = 0; k < segment; ++k) {
      if (!persistent) dir = direction();
      Vec nx = map.T(seq.back());
      for (std::size_t i = 0; i < n; ++i) nx[i] += delta * dir[i];
      seq.push_back(std::move(nx));
    }
    LpspTrial tr;
    tr.id = t;
    tr.defect = defect(map, seq);
    const ShadowResult sr = shadow(map, seq);
    tr.converged = sr.converged;
    tr.distance = sr.distance;
    tr.ratio = tr.defect > 0 ? sr.distance / tr.defect : 0.0;
    if (tr.converged)
      est.L_hat = std::max(est.L_hat, tr.ratio);
    else
      ++est.failures;
    est.log.push_back(tr);
  }
  est.low_confidence = est.failures > 0;
  return est;
}

ScalarMapAttractor scalar_map_attractor(const Map& T, double lo, double hi, std::size_t scan) {
  ScalarMapAttractor A;
  auto g = [&](double x) { return T(Vec{x})[0] - x; };
  double xp = lo, gp = g(lo);
  auto add_root = [&](double r) {
    if (!A.fixed_points.empty() && std::abs(A.fixed_points.back() - r) < 1e-9) return;
    const double h = 1e-6 * std::max(1.0, std::abs(r));
    const double d = (T(Vec{r + h})[0] - T(Vec{r - h})[0]) / (2 * h);
    A.fixed_points.push_back(r);
    A.stable.push_back(std::abs(d) < 1.0);
  };
  for (std::size_t i = 1; i < scan; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan - 1);
    const double gx = g(x);
    if (gp == 0.0) add_root(xp);
    if (gp * gx < 0) {
      double a = xp, b = x, ga = gp;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b), gm = g(m);
        if (ga * gm <= 0) {
          b = m;
        } else {
          a = m;
          ga = gm;
        }
      }
      add_root(0.5 * (a + b));
    }
    xp = x;
    gp = gx;
  }
  bool first = true;
  for (std::size_t i = 0; i < A.fixed_points.size(); ++i) {
    if (!A.stable[i]) continue;
    if (first) A.lo = A.hi = A.fixed_points[i], first = false;
    A.lo = std::min(A.lo, A.fixed_points[i]);
    A.hi = std::max(A.hi, A.fixed_points[i]);
  }
  if (first) throw RegimeError("scalar_map_attractor: no stable fixed point in the box");
  return A;
}

BoundVerdict attractor_bound(double dist, double sup_gap, double L_hat, bool maps_hyperbolic,
                             double delta0) {
  BoundVerdict v;
  v.distance = dist;
  if (!maps_hyperbolic) {
    v.applicable = false;
    v.note = "not applicable: hyperbolicity gate failed";
    return v;
  }
  if (sup_gap > delta0) {
    v.applicable = false;
    v.note = "not applicable: sup gap exceeds delta0";
    return v;
  }
  v.bound = L_hat * sup_gap;
  v.margin = v.bound - dist;
  v.pass = dist <= v.bound;
  return v;
}

}  // namespace alab
