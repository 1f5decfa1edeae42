#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "alab/attractor.hpp"
#include "alab/dynamics.hpp"
#include "alab/error.hpp"
#include "alab/isomorphism.hpp"
#include "support.hpp"

using namespace alab;
using namespace testing;

namespace {

ProblemParams homog_params() {
  ProblemParams p;
  p.lambda = 1.0;
  p.V0 = -0.5;
  return p;
}

// A = a I on R^N: no links, unit mass.
OperatorDisc scalar_operator(std::size_t N, double a) {
  OperatorDisc op;
  op.grid = Grid::uniform(N - 1);
  op.mass.assign(N, 1.0);
  op.conductance.assign(N - 1, 0.0);
  op.shift.assign(N, a);
  op.tag = ProblemTag::synthetic;
  return op;
}

Vec limit_state(const LimitSpectrum& ls, const Vec& z) {
  Vec u(ls.n, 0.0);
  for (std::size_t j = 0; j < ls.n; ++j)
    for (std::size_t i = 0; i < ls.n; ++i) u[i] += ls.vectors[j * ls.n + i] * z[j];
  return u;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("exponential Euler step: linear and constant forcing closed forms") {
  std::mt19937_64 rng(1);
  const auto sd = full_spectrum(neumann_fixture(50));
  const Vec u0 = random_vec(sd->n(), rng);
  const Vec got = step_full(*sd, FSpec::zero(), u0, 0.3, 7);
  Vec want = sd->coefficients(u0);
  for (std::size_t k = 0; k < want.size(); ++k) want[k] *= std::exp(-0.3 * sd->eigenvalues[k]);
  CHECK(max_abs_diff(got, sd->reconstruct(want)) < 1e-12);

  const double a = 2.5, c = 0.7, h = 0.4;
  const auto sa = full_spectrum(scalar_operator(6, a));
  const Vec v0 = random_vec(6, rng);
  const Vec v1 = step_full(*sa, FSpec::constant(c), v0, h, 3);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(v1[i] == doctest::Approx(std::exp(-a * h) * v0[i] + (1 - std::exp(-a * h)) * c / a).epsilon(1e-12));

  CHECK_THROWS_AS(step_full(*sd, FSpec::zero(), u0, 1.0, 0), InvalidInput);
}

TEST_CASE("exponential Euler step: semigroup property and first order self-convergence") {
  const auto sd = full_spectrum(neumann_fixture(60));
  const FSpec f = FSpec::cubic_cutoff();
  const Vec u0 = sample(sd->op->grid, [](double x) { return 0.8 * std::cos(kPi * x) + 0.1; });
  const Vec once = step_full(*sd, f, u0, 1.0, 200);
  const Vec twice = step_full(*sd, f, step_full(*sd, f, u0, 0.5, 100), 0.5, 100);
  CHECK(l2_norm(*sd->op, [&] { Vec d(once); for (std::size_t i = 0; i < d.size(); ++i) d[i] -= twice[i]; return d; }()) <= 1e-8);

  const Vec ref = step_full(*sd, f, u0, 1.0, 3200);
  std::vector<double> err;
  for (std::size_t s : {50u, 100u, 200u}) {
    const Vec u = step_full(*sd, f, u0, 1.0, s);
    Vec d(u);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= ref[i];
    err.push_back(l2_norm(*sd->op, d));
  }
  for (std::size_t k = 1; k < err.size(); ++k)
    CHECK(std::log2(err[k - 1] / err[k]) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("limit time-one map without nonlinearity is diagonal") {
  const LimitOperator L = limit_operator(ProblemTag::localized, localized_params());
  const LimitSpectrum ls = limit_spectrum(L);
  const Map S0 = time_one_map(limit_field(L, FSpec::zero()));
  const Vec z{0.3, -0.8};
  const Vec out = S0(z);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(out[j] == doctest::Approx(std::exp(-ls.eigenvalues[j]) * z[j]).epsilon(1e-10));
}

TEST_CASE("scalar limit equilibria and attractor") {
  const LimitOperator L = limit_operator(ProblemTag::homogenization, homog_params());
  const VectorField F = limit_field(L, FSpec::cubic_cutoff());
  const EquilibriumSet eq = find_equilibria(F, Vec{-2.0}, Vec{2.0});
  REQUIRE(eq.points.size() == 3);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(eq.points[0].z[0] == doctest::Approx(-r).epsilon(1e-10));
  CHECK(std::abs(eq.points[1].z[0]) < 1e-12);
  CHECK(eq.points[2].z[0] == doctest::Approx(r).epsilon(1e-10));
  CHECK(eq.points[0].unstable_dim == 0);
  CHECK(eq.points[1].unstable_dim == 1);
  CHECK(eq.points[2].unstable_dim == 0);
  CHECK(eq.all_hyperbolic());

  const AttractorCloud A = attractor_approximate(F, eq);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& p : A.points) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  CHECK(lo == doctest::Approx(-r).epsilon(1e-5));
  CHECK(hi == doctest::Approx(r).epsilon(1e-5));
  CHECK(A.diameter() == doctest::Approx(2 * r).epsilon(1e-5));
  CHECK(invariance_residual(A, time_one_map(F), Vec{1.0}) <= 1e-4);
  CHECK(equilibria_csv(eq).rfind("# equilibria v1", 0) == 0);
}

TEST_CASE("zero nonlinearity has the single stable equilibrium zero") {
  const LimitOperator L = limit_operator(ProblemTag::localized, localized_params());
  const VectorField F = limit_field(L, FSpec::zero());
  const EquilibriumSet eq = find_equilibria(F, Vec{-2.0, -2.0}, Vec{2.0, 2.0});
  REQUIRE(eq.points.size() == 1);
  CHECK(std::abs(eq.points[0].z[0]) < 1e-12);
  CHECK(eq.points[0].unstable_dim == 0);
  const AttractorCloud A = attractor_approximate(F, eq);
  for (const auto& p : A.points) CHECK(std::hypot(p[0], p[1]) < 1e-12);
}

TEST_CASE("symmetric two-node limit has swap-symmetric equilibria and an invariant attractor") {
  const ProblemParams prm = localized_params(0.1);
  const LimitOperator L = limit_operator(ProblemTag::localized, prm);
  const LimitSpectrum ls = limit_spectrum(L);
  const VectorField F = limit_field(L, FSpec::cubic_cutoff());
  const EquilibriumSet eq = find_equilibria(F, Vec{-2.0, -2.0}, Vec{2.0, 2.0});
  REQUIRE(eq.points.size() >= 3);
  CHECK(eq.all_hyperbolic());
  std::vector<Vec> us;
  for (const auto& e : eq.points) us.push_back(limit_state(ls, e.z));
  for (const auto& u : us) {
    bool found = false;
    for (const auto& v : us) found = found || (std::abs(u[0] - v[1]) < 1e-8 && std::abs(u[1] - v[0]) < 1e-8);
    CHECK(found);
  }
  const AttractorCloud A = attractor_approximate(F, eq);
  CHECK(A.unsettled_orbits == 0);
  CHECK(invariance_residual(A, time_one_map(F), L.weights) < 1e-4);
}

TEST_CASE("Hausdorff distances") {
  const std::vector<Vec> A{{0.0}}, B{{1.0}, {2.0}};
  const HausdorffResult h = hausdorff(A, B, Vec{1.0});
  CHECK(h.ab == doctest::Approx(1.0));
  CHECK(h.ba == doctest::Approx(2.0));
  CHECK(h.d() == doctest::Approx(2.0));
  CHECK(hausdorff(B, B, Vec{1.0}).d() == 0.0);
  const HausdorffResult w = hausdorff(std::vector<Vec>{{0.0, 0.0}}, std::vector<Vec>{{1.0, 1.0}}, Vec{4.0, 9.0});
  CHECK(w.d() == doctest::Approx(std::sqrt(13.0)));
  const std::vector<Vec> line{{0.0, 0.0}, {2.0, 0.0}};
  CHECK(polyline_distance(Vec{1.0, 0.5}, line, Vec{1.0, 1.0}) == doctest::Approx(0.5));
  CHECK(polyline_distance(Vec{3.0, 0.0}, line, Vec{1.0, 1.0}) == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  std::vector<Vec> X, Y;
  for (int i = 0; i < 200; ++i) X.push_back(random_vec(2, rng));
  for (int i = 0; i < 150; ++i) Y.push_back(random_vec(2, rng));
  const Vec wt{0.7, 1.9};
  double ab = 0.0;
  for (const auto& x : X) {
    double m = INFINITY;
    for (const auto& y : Y) m = std::min(m, std::sqrt(wt[0] * std::pow(x[0] - y[0], 2) + wt[1] * std::pow(x[1] - y[1], 2)));
    ab = std::max(ab, m);
  }
  CHECK(hausdorff(X, Y, wt).ab == doctest::Approx(ab).epsilon(1e-12));
}

TEST_CASE("synthetic reduced map equals the limit map") {
  ProblemParams prm = localized_params(0.1);
  prm.synthetic_tail = 10;
  const auto sd = full_spectrum(assemble_synthetic(prm, 0.005));
  const ManifoldSetup ms = make_manifold_setup(split(sd, 2), limit_operator(ProblemTag::synthetic, prm),
                                               make_coupling(*sd->op, prm), FSpec::cubic_cutoff(), 10);
  const Vec lo{-1.2, -1.2}, hi{1.2, 1.2};
  const GraphSection s = zero_section(2, 10, lo, hi, 9);
  const ReducedField rf = make_reduced_field(s, ms, 17);
  const double gap = map_sup_gap(time_one_map(rf.field), time_one_map(rf.limit), Vec{-1.0, -1.0},
                                 Vec{1.0, 1.0}, ms.iso.weights, 7);
  CHECK(gap <= 1e-8);
}

TEST_CASE("equilibrium distances") {
  const Grid g = Grid::uniform(400);
  const ProblemParams prm = homog_params();
  const OperatorDisc op = assemble(g, homogenization_coefficients(g, prm, 0.05));
  const CouplingPair cp = make_coupling(op, prm);
  const EquilibriumDistance z = equilibrium_rate(Vec{0.0}, op, cp, FSpec::zero());
  CHECK(z.converged);
  CHECK(z.distance == 0.0);

  ProblemParams sp = localized_params(0.1);
  sp.synthetic_tail = 20;
  const OperatorDisc sop = assemble_synthetic(sp, 0.01);
  const LimitOperator L = limit_operator(ProblemTag::synthetic, sp);
  const EquilibriumSet eq = find_equilibria(limit_field(L, FSpec::cubic_cutoff()), Vec{-2, -2}, Vec{2, 2});
  const LimitSpectrum ls = limit_spectrum(L);
  for (const auto& e : eq.points) {
    const EquilibriumDistance d = equilibrium_rate(limit_state(ls, e.z), sop, make_coupling(sop, sp),
                                                   FSpec::cubic_cutoff());
    CHECK(d.converged);
    CHECK(d.distance <= 1e-8);
  }

  // Nonzero equilibria move at order sqrt(eps) in the energy norm.
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<double> dist;
  for (double eps : {0.05, 0.025, 0.0125}) {
    const OperatorDisc o = assemble(Grid::uniform(2000), homogenization_coefficients(Grid::uniform(2000), prm, eps));
    const EquilibriumDistance d = equilibrium_rate(Vec{r}, o, make_coupling(o, prm), FSpec::cubic_cutoff());
    REQUIRE(d.converged);
    dist.push_back(d.distance);
  }
  CHECK(dist[1] < dist[0]);
  CHECK(dist[2] < dist[1]);
}

TEST_CASE("newton on the full problem converges to the constant equilibria") {
  const Grid g = Grid::uniform(300);
  const OperatorDisc op = assemble(g, constant_coefficients(g, 1.0, -0.5, 1.0));
  const FullEquilibrium e = newton_full(op, FSpec::cubic_cutoff(), Vec(op.size(), 0.6));
  CHECK(e.converged);
  for (double v : e.u) CHECK(v == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("coordinate maps: isomorphism error is controlled by the lift error and the resolvent gap") {
  const ProblemParams prm = homog_params();
  std::mt19937_64 rng(77);
  std::vector<double> consts;
  for (double eps : {0.1, 0.025}) {
    const Grid g = Grid::uniform(400);
    const auto sd = full_spectrum(assemble(g, homogenization_coefficients(g, prm, eps)));
    const SpectralSplit sp = split(sd, 1);
    const LimitOperator L = limit_operator(ProblemTag::homogenization, prm);
    const CouplingPair cp = make_coupling(*sd->op, prm);
    const Isomorphism iso = make_isomorphism(sp, L, cp);
    const double tau = resolvent_gap_exact(*sd, L, cp);
    double C = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Vec w0 = random_vec(1, rng);
      Vec w = cp.lift(w0);
      const Vec noise = random_vec(w.size(), rng);
      const double scale = 0.01 / energy_norm(*sd->op, noise);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * noise[i];
      const Vec je = iso.from_eigen(sd->coefficients(w, 1));
      const Vec j0 = iso.from_limit(w0);
      Vec d(w);
      const Vec Ew0 = cp.lift(w0);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= Ew0[i];
      C = std::max(C, iso.dist(je, j0) / (energy_norm(*sd->op, d) + tau));
    }
    consts.push_back(C);
  }
  CHECK(consts[0] < 10.0);
  CHECK(consts[1] < 10.0);
}

}  // TEST_SUITE
