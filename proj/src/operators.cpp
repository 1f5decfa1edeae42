#include "alab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "alab/error.hpp"

namespace alab {

namespace {
void check_size(const OperatorDisc& op, std::size_t n, const char* what) {
  if (n != op.size()) {
    std::ostringstream os;
    os << what << ": vector has " << n << " entries, operator has " << op.size();
    throw InvalidInput(os.str());
  }
}
}  // namespace

Vec OperatorDisc::stiffness_diag() const {
  const std::size_t n = size();
  Vec d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = mass[i] * shift[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    d[i] += conductance[i];
    d[i + 1] += conductance[i];
  }
  return d;
}

Vec OperatorDisc::negated_conductance() const {
  Vec e(conductance);
  for (double& x : e) x = -x;
  return e;
}

double OperatorDisc::norm_bound() const {
  const Vec d = stiffness_diag();
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double row = d[i];
    if (i > 0) row += conductance[i - 1];
    if (i + 1 < size()) row += conductance[i];
    m = std::max(m, row / mass[i]);
  }
  return m;
}

OperatorDisc assemble(const Grid& grid, const Coefficients& coeff) {
  if (coeff.p.size() != grid.n_cells || coeff.V.size() != grid.size())
    throw InvalidInput("coefficient arrays do not match the grid");
  if (!(coeff.m0 > 0)) throw InvalidInput("m0 must be positive");
  OperatorDisc op;
  op.grid = grid;
  op.mass = grid.weights;
  op.epsilon = coeff.epsilon;
  op.m0 = coeff.m0;
  op.tag = coeff.tag;
  op.conductance.resize(grid.n_cells);
  for (std::size_t k = 0; k < grid.n_cells; ++k) {
    if (!(coeff.p[k] > 0)) {
      std::ostringstream os;
      os << "diffusion p is not positive on cell " << k << " (x = " << grid.midpoint(k)
         << ", p = " << coeff.p[k] << ")";
      throw InvalidInput(os.str());
    }
    op.conductance[k] = coeff.p[k] / grid.h;
  }
  op.shift.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = coeff.lambda + coeff.V[i];
    if (!(s >= coeff.m0)) {
      std::ostringstream os;
      os << "lambda + V = " << s << " below m0 = " << coeff.m0 << " at node " << i
         << " (x = " << grid.nodes[i] << ")";
      throw InvalidInput(os.str());
    }
    op.shift[i] = s;
  }
  return op;
}

LimitOperator limit_operator(ProblemTag tag, const ProblemParams& prm) {
  LimitOperator L;
  L.tag = tag;
  if (tag == ProblemTag::synthetic) tag = prm.synthetic_base;
  if (tag == ProblemTag::homogenization) {
    const double a = prm.lambda + prm.V0;
    if (!(a > 0)) throw InvalidInput("lambda + V0 must be positive");
    L.n_dim = 1;
    L.matrix = {a};
    L.weights = {1.0};
    return L;
  }
  if (!(prm.x1 > 0 && prm.x1 < 1)) throw InvalidInput("x1 must lie in (0,1)");
  if (!(prm.l1 > 0)) throw InvalidInput("l1 must be positive");
  if (prm.a1 < 0) throw InvalidInput("a1 must be nonnegative");
  if (!(prm.lambda > 0)) throw InvalidInput("lambda must be positive");
  const double k1 = prm.a1 / (2.0 * prm.l1 * prm.x1);
  const double k2 = prm.a1 / (2.0 * prm.l1 * (1.0 - prm.x1));
  L.n_dim = 2;
  L.matrix = {k1 + prm.lambda, -k1, -k2, k2 + prm.lambda};
  L.weights = {prm.x1, 1.0 - prm.x1};
  return L;
}

OperatorDisc assemble_synthetic(const ProblemParams& prm, double eps) {
  if (!(eps > 0)) throw InvalidInput("epsilon must be positive");
  const LimitOperator L = limit_operator(prm.synthetic_base, prm);
  const std::size_t n = L.n_dim, m = prm.synthetic_tail;
  OperatorDisc op;
  op.grid = Grid::uniform(n + m - 1);
  op.epsilon = eps;
  op.m0 = prm.m0;
  op.tag = ProblemTag::synthetic;
  op.mass.assign(n + m, 1.0);
  op.conductance.assign(n + m - 1, 0.0);
  op.shift.resize(n + m);
  for (std::size_t i = 0; i < n; ++i) op.mass[i] = L.weights[i];
  if (n == 1) {
    op.shift[0] = L(0, 0);
  } else {
    // W0 A0 = [[c + lambda x1, -c], [-c, c + lambda (1-x1)]] with c = a1/(2 l1).
    const double c = -L(0, 1) * L.weights[0];
    op.conductance[0] = c;
    op.shift[0] = L(0, 0) - c / L.weights[0];
    op.shift[1] = L(1, 1) - c / L.weights[1];
  }
  for (std::size_t k = 1; k <= m; ++k) {
    const double kp = static_cast<double>(k) * std::numbers::pi;
    op.shift[n + k - 1] = kp * kp / eps;
  }
  return op;
}

Vec LimitOperator::apply(std::span<const double> u) const {
  Vec out(n_dim, 0.0);
  for (std::size_t i = 0; i < n_dim; ++i)
    for (std::size_t j = 0; j < n_dim; ++j) out[i] += (*this)(i, j) * u[j];
  return out;
}

Vec LimitOperator::solve(std::span<const double> g) const {
  if (n_dim == 1) return {g[0] / matrix[0]};
  const double det = matrix[0] * matrix[3] - matrix[1] * matrix[2];
  return {(matrix[3] * g[0] - matrix[1] * g[1]) / det, (matrix[0] * g[1] - matrix[2] * g[0]) / det};
}

double LimitOperator::inner(std::span<const double> u, std::span<const double> v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_dim; ++i) s += weights[i] * u[i] * v[i];
  return s;
}

double l2_inner(const Grid& grid, std::span<const double> u, std::span<const double> v) {
  if (u.size() != grid.size() || v.size() != grid.size())
    throw InvalidInput("l2_inner: vector size does not match grid");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += grid.weights[i] * u[i] * v[i];
  return s;
}

double l2_inner(const OperatorDisc& op, std::span<const double> u, std::span<const double> v) {
  check_size(op, u.size(), "l2_inner");
  check_size(op, v.size(), "l2_inner");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += op.mass[i] * u[i] * v[i];
  return s;
}

double l2_norm(const OperatorDisc& op, std::span<const double> u) {
  return std::sqrt(l2_inner(op, u, u));
}

double energy_inner(const OperatorDisc& op, std::span<const double> u, std::span<const double> v) {
  check_size(op, u.size(), "energy_inner");
  check_size(op, v.size(), "energy_inner");
  double s = 0.0;
  const std::size_t n = u.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    s += op.conductance[i] * (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
  for (std::size_t i = 0; i < n; ++i) s += op.mass[i] * op.shift[i] * u[i] * v[i];
  return s;
}

double energy_norm(const OperatorDisc& op, std::span<const double> u) {
  return std::sqrt(energy_inner(op, u, u));
}

Vec apply_op(const OperatorDisc& op, std::span<const double> u) {
  check_size(op, u.size(), "apply_op");
  const std::size_t n = u.size();
  Vec out(n);
  double flux_left = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double flux_right = (i + 1 < n) ? op.conductance[i] * (u[i + 1] - u[i]) : 0.0;
    out[i] = (flux_left - flux_right) / op.mass[i] + op.shift[i] * u[i];
    flux_left = flux_right;
  }
  return out;
}

Vec tridiagonal_solve(std::span<const double> d, std::span<const double> e,
                      std::span<const double> b) {
  const std::size_t n = d.size();
  Vec c(n), x(b.begin(), b.end());
  double piv = d[0];
  if (piv == 0.0) throw InvalidInput("tridiagonal solve: zero pivot at row 0");
  x[0] /= piv;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = e[i - 1] / piv;
    piv = d[i] - e[i - 1] * c[i - 1];
    if (piv == 0.0) throw InvalidInput("tridiagonal solve: zero pivot at row " + std::to_string(i));
    x[i] = (x[i] - e[i - 1] * x[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

Vec solve(const OperatorDisc& op, std::span<const double> g) {
  check_size(op, g.size(), "solve");
  const Vec d = op.stiffness_diag();
  const Vec e = op.negated_conductance();
  const std::size_t n = g.size();
  Vec rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = op.mass[i] * g[i];
  Vec u = tridiagonal_solve(d, e, rhs);
  Vec r = apply_op(op, u);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = op.mass[i] * (g[i] - r[i]);
  const Vec du = tridiagonal_solve(d, e, rhs);
  for (std::size_t i = 0; i < n; ++i) u[i] += du[i];
  return u;
}

}  // namespace alab
