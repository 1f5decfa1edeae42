#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "alab/dynamics.hpp"
#include "alab/error.hpp"
#include "alab/manifold.hpp"
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

ManifoldSetup homog_setup(double eps, std::size_t n_cells, FSpec f, std::size_t tail = 200) {
  const ProblemParams prm = homog_params();
  const Grid g = Grid::uniform(n_cells);
  const auto sd = full_spectrum(assemble(g, homogenization_coefficients(g, prm, eps)));
  return make_manifold_setup(split(sd, 1), limit_operator(ProblemTag::homogenization, prm),
                             make_coupling(*sd->op, prm), f, tail);
}

ManifoldSetup synthetic_setup(double eps, std::size_t tail, FSpec f) {
  ProblemParams prm = localized_params(0.1);
  prm.synthetic_tail = tail;
  const auto sd = full_spectrum(assemble_synthetic(prm, eps));
  return make_manifold_setup(split(sd, 2), limit_operator(ProblemTag::synthetic, prm),
                             make_coupling(*sd->op, prm), f, tail);
}

GraphSection random_section(const ManifoldSetup& ms, const Vec& lo, const Vec& hi, double scale,
                            std::mt19937_64& rng) {
  GraphSection s = zero_section(ms.n(), ms.m(), lo, hi, 9);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const std::size_t k = i % ms.m();
    // Decaying tail profile keeps the section in X^{1/2}.
    s.values[i] = scale * g(rng) / (1.0 + k) / std::sqrt(ms.sp.lambda(ms.n() + k));
  }
  refresh_norms(ms, s);
  return s;
}

// Smallest beta meeting every inequality at M = 1, Delta = 1/2 (closed form).
double beta_threshold(double gamma, double rho) {
  const double c = gamma + 1.5 * rho;
  const double B = gamma * c + 2 * gamma * rho + 3 * rho * rho;
  const double contraction = (B + std::sqrt(B * B - 8 * gamma * gamma * rho * c)) / (2 * gamma);
  const double delta_bound = c + 3 * rho;
  const double lipschitz = 0.5 * ((rho + c) + std::sqrt((c - rho) * (c - rho) + 12 * rho * rho));
  return std::max({contraction, delta_bound, lipschitz});
}

}  // namespace

TEST_SUITE("manifold") {

TEST_CASE("zero nonlinearity satisfies every inequality with contraction zero") {
  const ManifoldConstants mc = evaluate_constants(40.0, 3.5, 0.0);
  CHECK(mc.all_hold());
  CHECK(mc.contraction == 0.0);
  CHECK(mc.first_failure() == nullptr);
}

TEST_CASE("localized regime holds at eps = 0.02 and fails at eps = 0.5") {
  const ProblemParams prm = localized_params();
  const LimitOperator L = limit_operator(ProblemTag::localized, prm);
  const double rho = FSpec::cubic_cutoff().local_bound(1.5);
  const Grid g = Grid::uniform(2000);
  auto sp_at = [&](double eps) {
    return split(std::make_shared<const SpectralData>(
                     eigendecompose(assemble(g, localized_coefficients(g, prm, eps)), 3)),
                 2);
  };
  const ManifoldConstants ok = check_constants(sp_at(0.02), L, rho);
  CHECK(ok.all_hold());
  CHECK(ok.contraction < 0.5);
  CHECK_THROWS_WITH_AS(check_constants(sp_at(0.5), L, rho),
                       doctest::Contains("epsilon not in manifold regime: '"), RegimeError);
}

TEST_CASE("synthetic regime threshold matches the closed form in K and rho") {
  ProblemParams prm = localized_params(0.1);
  prm.synthetic_tail = 20;
  const LimitOperator L = limit_operator(ProblemTag::synthetic, prm);
  const double gamma = limit_spectrum(L).eigenvalues.back() + 0.5;
  const double rho = 5.75;
  // The first tail eigenvalue is pi^2 / eps.
  const double eps_star = kPi * kPi / beta_threshold(gamma, rho);
  for (double factor : {0.98, 1.02}) {
    const double eps = factor * eps_star;
    const auto sd = std::make_shared<const SpectralData>(eigendecompose(assemble_synthetic(prm, eps)));
    const SpectralSplit sp = split(sd, 2);
    CHECK(sp.gap.upper == doctest::Approx(kPi * kPi / eps).epsilon(1e-12));
    if (factor < 1)
      CHECK_NOTHROW(check_constants(sp, L, rho));
    else
      CHECK_THROWS_AS(check_constants(sp, L, rho), RegimeError);
  }
}

TEST_CASE("transform horizon bounds the truncated integral") {
  const ManifoldConstants mc = evaluate_constants(100.0, 3.5, 2.0);
  const TransformParams tp = transform_params(mc, 1.0, 1e-6);
  CHECK(tp.h == doctest::Approx(0.01));
  CHECK(std::exp(-mc.beta * tp.T_h) * mc.rho_f * mc.M / mc.beta <= 1e-7 * (1 + 1e-9));
  CHECK(tp.steps * tp.h == doctest::Approx(tp.T_h));
}

TEST_CASE("zero nonlinearity maps every section to zero in one step") {
  const ManifoldSetup ms = homog_setup(0.05, 300, FSpec::zero());
  std::mt19937_64 rng(2);
  const Vec lo{-1.0}, hi{1.0};
  const GraphSection s0 = random_section(ms, lo, hi, 0.1, rng);
  REQUIRE(s0.sup_norm > 0);
  const ManifoldConstants mc = evaluate_constants(ms.sp.gap.upper, 1.0, 0.0);
  const TransformParams tp = transform_params(mc, ms.sp.lambda(0));
  const GraphSection s1 = graph_transform_step(s0, ms, tp);
  for (double v : s1.values) CHECK(std::abs(v) <= 1e-30);
  const FixedPointResult fp = solve_fixed_point(s0, ms, tp);
  CHECK(fp.section.sup_norm == 0.0);
  CHECK(fp.iterations <= 2);
}

TEST_CASE("synthetic fixture has a zero manifold and the transform contracts") {
  const FSpec f = FSpec::cubic_cutoff();
  const ManifoldSetup ms = synthetic_setup(0.002, 20, f);
  const Vec lo{-1.2, -1.2}, hi{1.2, 1.2};
  const double rho = local_rho_f(ms, lo, hi);
  const ManifoldConstants mc =
      evaluate_constants(ms.sp.gap.upper, limit_spectrum(ms.limit).eigenvalues.back() + 0.5, rho);
  REQUIRE(mc.all_hold());
  const TransformParams tp = transform_params(mc, ms.sp.lambda(1));

  const GraphSection z = zero_section(2, ms.m(), lo, hi, 9);
  const GraphSection s1 = graph_transform_step(z, ms, tp);
  for (double v : s1.values) CHECK(std::abs(v) <= 1e-30);

  std::mt19937_64 rng(8);
  for (int t = 0; t < 3; ++t) {
    const GraphSection s0 = random_section(ms, lo, hi, 0.05, rng);
    GraphSection s = graph_transform_step(s0, ms, tp);
    refresh_norms(ms, s);
    CHECK(s.sup_norm <= mc.contraction * s0.sup_norm);
  }
}

TEST_CASE("homogenization fixed point: residual, invariance under the full flow") {
  const FSpec f = FSpec::cubic_cutoff();
  const ManifoldSetup ms = homog_setup(0.05, 400, f);
  const Vec lo{-1.1}, hi{1.1};
  const double rho = local_rho_f(ms, lo, hi);
  const ManifoldConstants mc = evaluate_constants(ms.sp.gap.upper, 1.0, rho);
  REQUIRE(mc.all_hold());
  const double tol = 1e-6;
  const TransformParams tp = transform_params(mc, ms.sp.lambda(0), tol);
  GraphSection s0 = zero_section(1, ms.m(), lo, hi, 33);
  const FixedPointResult fp = solve_fixed_point(s0, ms, tp);
  const GraphSection& s = fp.section;
  CHECK(s.sup_norm > 0.0);
  CHECK(fp.diag.tail_estimate < tol / 10);

  const GraphSection again = graph_transform_step(s, ms, tp);
  CHECK(section_distance(ms, again, s) <= 2 * tol);

  // Points on the graph stay on it after time one.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  const std::size_t nm = ms.n() + ms.m();
  for (int t = 0; t < 20; ++t) {
    const Vec z{U(rng)};
    const Vec c = ms.iso.to_eigen(z);
    const Vec u = lift_point(ms, c, s.eval(z));
    const Vec u1 = step_full(ms.sd(), f, u, 1.0, 4000);
    const Vec c1 = ms.sd().coefficients(u1, nm);
    const Vec z1 = ms.iso.from_eigen(Vec(c1.begin(), c1.begin() + 1));
    REQUIRE(s.inside(z1));
    const Vec s1 = s.eval(z1);
    Vec d(ms.m());
    for (std::size_t k = 0; k < ms.m(); ++k) d[k] = c1[1 + k] - s1[k];
    CHECK(tail_energy_norm(ms, d) <= 10 * tol);
  }

  // Off-graph starts are attracted at a rate set by the spectral gap.
  const double L = mc.L, beta = mc.beta;
  const Vec z{0.3};
  const Vec c = ms.iso.to_eigen(z);
  Vec off = s.eval(z);
  off[0] += 0.05;
  Vec u = lift_point(ms, c, off);
  double d_prev = 0.0, rate = INFINITY;
  for (int k = 0; k <= 2; ++k) {
    const Vec ck = ms.sd().coefficients(u, nm);
    const Vec zk = ms.iso.from_eigen(Vec(ck.begin(), ck.begin() + 1));
    const Vec sk = s.eval(zk);
    Vec d(ms.m());
    for (std::size_t j = 0; j < ms.m(); ++j) d[j] = ck[1 + j] - sk[j];
    const double dist = tail_energy_norm(ms, d);
    if (k > 0 && dist > 1e-12) rate = std::min(rate, std::log(d_prev / dist) / 0.02);
    d_prev = dist;
    u = step_full(ms.sd(), f, u, 0.02, 200);
  }
  CHECK(rate >= 0.5 * (beta - L));
}

TEST_CASE("reduced field without nonlinearity is the linear decay") {
  const ManifoldSetup ms = homog_setup(0.05, 300, FSpec::zero());
  const GraphSection s = zero_section(1, ms.m(), Vec{-1.0}, Vec{1.0}, 9);
  const Vec c{0.4};
  const Vec r = reduced_rhs(s, ms, c);
  CHECK(r[0] == doctest::Approx(-ms.sp.lambda(0) * 0.4).epsilon(1e-14));
  CHECK_THROWS_AS(reduced_rhs(s, ms, ms.iso.to_eigen(Vec{5.0})), InvalidInput);
}

TEST_CASE("graph section text round trip") {
  const ManifoldSetup ms = synthetic_setup(0.01, 6, FSpec::zero());
  std::mt19937_64 rng(21);
  GraphSection s = random_section(ms, Vec{-1.0, -0.5}, Vec{1.0, 0.7}, 1.0, rng);
  s.epsilon = 0.01;
  std::stringstream io;
  write_section(io, s);
  const GraphSection r = read_section(io);
  CHECK(r.n == s.n);
  CHECK(r.m == s.m);
  CHECK(r.pts == s.pts);
  CHECK(r.lo == s.lo);
  CHECK(r.hi == s.hi);
  CHECK(r.values == s.values);
  CHECK(r.epsilon == s.epsilon);
  CHECK(r.sup_norm == s.sup_norm);
  std::stringstream bad("not a section\n");
  CHECK_THROWS_AS(read_section(bad), InvalidInput);
}

TEST_CASE("multilinear interpolation reproduces affine data and clamps outside") {
  const ManifoldSetup ms = synthetic_setup(0.01, 3, FSpec::zero());
  GraphSection s = zero_section(2, 3, Vec{-1.0, -2.0}, Vec{1.0, 2.0}, 5);
  for (std::size_t idx = 0; idx < s.nodes(); ++idx) {
    const Vec z = s.node_coords(idx);
    for (std::size_t k = 0; k < 3; ++k) s.values[idx * 3 + k] = (k + 1) * z[0] - 0.5 * z[1] + k;
  }
  const Vec v = s.eval(Vec{0.3, -0.7});
  for (std::size_t k = 0; k < 3; ++k) CHECK(v[k] == doctest::Approx((k + 1) * 0.3 + 0.35 + k));
  const Vec w = s.eval(Vec{5.0, 0.0});
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(s.inside(Vec{0.9, 1.9}));
  CHECK(!s.inside(Vec{1.1, 0.0}));
  CHECK(s.inside(Vec{1.1, 0.0}, 1.2));
}

}  // TEST_SUITE
