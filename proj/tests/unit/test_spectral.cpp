#include <doctest.h>

#include <cmath>
#include <random>

#include "alab/coupling.hpp"
#include "alab/error.hpp"
#include "alab/spectral.hpp"
#include "support.hpp"

using namespace alab;
using namespace testing;

namespace {

Vec mode(const SpectralData& sd, std::size_t j) { return Vec(sd.vec(j).begin(), sd.vec(j).end()); }

double l2_dist(const OperatorDisc& op, const Vec& a, const Vec& b) {
  Vec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return l2_norm(op, d);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("fixture eigenpairs are shifted Neumann cosines") {
  const SpectralData sd = eigendecompose(neumann_fixture(2000), 6);
  const Grid& g = sd.op->grid;
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(sd.eigenvalues[k] == doctest::Approx(1.0 + std::pow(k * kPi, 2)).epsilon(2e-5));
    Vec want(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      want[i] = k == 0 ? 1.0 : std::sqrt(2.0) * std::cos(k * kPi * g.nodes[i]);
    CHECK(max_abs_diff(mode(sd, k), want) < 1e-5);
  }
  // Rounding in the eigenvector scales like machine epsilon times |A| / gap, about 2e-10 here.
  CHECK(max_abs_diff(mode(sd, 0), Vec(g.size(), 1.0)) < 1e-9);
}

TEST_CASE("eigenvectors are mass orthonormal and eigenvalues ascend") {
  const auto sd = full_spectrum(neumann_fixture(150));
  for (std::size_t j = 0; j < sd->count(); j += 13)
    for (std::size_t k = 0; k < sd->count(); k += 17) {
      const double ip = l2_inner(*sd->op, sd->vec(j), sd->vec(k));
      CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) < 1e-10);
    }
  for (std::size_t j = 1; j < sd->count(); ++j) CHECK(sd->eigenvalues[j] > sd->eigenvalues[j - 1]);
}

TEST_CASE("localized eigenvalues converge to the limit spectrum") {
  const ProblemParams prm = localized_params();
  const Grid g = Grid::uniform(2000);
  double prev_err = INFINITY, prev_l3 = 0.0;
  for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
    const SpectralData sd = eigendecompose(assemble(g, localized_coefficients(g, prm, eps)), 3);
    CHECK(std::abs(sd.eigenvalues[0] - 1.0) < 1e-10);
    const double err = std::abs(sd.eigenvalues[1] - 3.0);
    CHECK(err < prev_err);
    CHECK(sd.eigenvalues[2] > prev_l3);
    prev_err = err;
    prev_l3 = sd.eigenvalues[2];
  }
  CHECK(prev_err < 0.1);
}

TEST_CASE("second localized eigenvector approaches the piecewise constant limit") {
  const ProblemParams prm = localized_params();
  const Grid g = Grid::uniform(2000);
  const SpectralData sd = eigendecompose(assemble(g, localized_coefficients(g, prm, 0.0125)), 2);
  const Vec phi = mode(sd, 1);
  // Sign convention makes the first entry positive, so the left plateau is +1 here.
  CHECK(phi[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(phi[g.size() - 1] == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("split: identity, mean projection, gap, ties") {
  const auto sd = full_spectrum(neumann_fixture(60));
  std::mt19937_64 rng(3);
  const Vec u = random_vec(sd->n(), rng);

  const SpectralSplit all = split(sd, sd->count());
  CHECK(max_abs_diff(all.project(u), u) < 1e-11);

  const SpectralSplit one = split(sd, 1);
  const double mean = l2_inner(*sd->op, u, Vec(sd->n(), 1.0));
  CHECK(max_abs_diff(one.project(u), Vec(sd->n(), mean)) < 1e-12);
  CHECK(one.gap.ratio() == doctest::Approx(sd->eigenvalues[1] / sd->eigenvalues[0]));

  const Grid g = Grid::uniform(2000);
  const auto loc = std::make_shared<const SpectralData>(
      eigendecompose(assemble(g, localized_coefficients(g, localized_params(), 0.02)), 3));
  CHECK(split(loc, 2).gap.ratio() > 10.0);

  CHECK_THROWS_AS(split(sd, 0), InvalidInput);

  auto tied = std::make_shared<SpectralData>(*sd);
  tied->eigenvalues[2] = tied->eigenvalues[1];
  CHECK_THROWS_WITH_AS(split(tied, 2), doctest::Contains("tie"), InvalidInput);
}

TEST_CASE("projection is idempotent and self-adjoint") {
  const auto sd = full_spectrum(neumann_fixture(80));
  const SpectralSplit sp = split(sd, 3);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const Vec u = random_vec(sd->n(), rng), v = random_vec(sd->n(), rng);
    const Vec Qu = sp.project(u);
    CHECK(l2_dist(*sd->op, sp.project(Qu), Qu) <= 1e-10 * l2_norm(*sd->op, u));
    const double a = l2_inner(*sd->op, Qu, v), b = l2_inner(*sd->op, u, sp.project(v));
    CHECK(std::abs(a - b) <= 1e-10 * l2_norm(*sd->op, u) * l2_norm(*sd->op, v));
  }
}

TEST_CASE("semigroup") {
  const auto sd = full_spectrum(neumann_fixture(80));
  const SpectralSplit sp = split(sd, 2);
  const OperatorDisc& op = *sd->op;

  for (std::size_t j : {0u, 1u, 5u}) {
    Vec want = mode(*sd, j);
    for (double& x : want) x *= std::exp(-sd->eigenvalues[j]);
    CHECK(l2_dist(op, semigroup_apply(sp, 1.0, mode(*sd, j), Part::full), want) < 1e-12);
  }

  std::mt19937_64 rng(17);
  const Vec u = random_vec(sd->n(), rng);
  CHECK(l2_dist(op, semigroup_apply(sp, 0.0, u, Part::full), u) < 1e-10 * l2_norm(op, u));

  for (auto [t, s] : {std::pair{0.01, 0.02}, {0.3, 0.1}, {1.0, 2.5}}) {
    const Vec a = semigroup_apply(sp, t + s, u, Part::full);
    const Vec b = semigroup_apply(sp, t, semigroup_apply(sp, s, u, Part::full), Part::full);
    CHECK(l2_dist(op, a, b) <= 1e-10 * l2_norm(op, u));
  }

  // Backward flow on Y inverts forward flow.
  const Vec y = sp.project(u);
  const Vec back = semigroup_apply(sp, -0.7, semigroup_apply(sp, 0.7, y, Part::plus), Part::plus);
  CHECK(l2_dist(op, back, y) <= 1e-10 * l2_norm(op, y));

  CHECK_THROWS_AS(semigroup_apply(sp, -1.0, u, Part::minus), InvalidInput);
  CHECK_THROWS_AS(semigroup_apply(sp, -1.0, u, Part::full), InvalidInput);
}

TEST_CASE("decay on Z has constant one") {
  const auto sd = full_spectrum(neumann_fixture(100));
  const SpectralSplit sp = split(sd, 2);
  const double beta = sd->eigenvalues[2];
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec z = sp.complement(random_vec(sd->n(), rng));
    for (double t : {0.001, 0.01, 0.1}) {
      const double lhs = fractional_norm(*sd, 0.5, semigroup_apply(sp, t, z, Part::minus));
      CHECK(lhs <= std::exp(-beta * t) * fractional_norm(*sd, 0.5, z) * (1 + 1e-10));
    }
  }
}

TEST_CASE("smoothing factor is attained at t = alpha / beta on the first tail mode") {
  const auto sd = full_spectrum(neumann_fixture(100));
  const SpectralSplit sp = split(sd, 1);
  const double alpha = 0.5, beta = sd->eigenvalues[1];
  const double t = alpha / beta;
  const Vec out = semigroup_apply(sp, t, mode(*sd, 1), Part::minus);
  const double factor = fractional_norm(*sd, alpha, out) / l2_norm(*sd->op, mode(*sd, 1));
  CHECK(factor == doctest::Approx(std::exp(-alpha) * std::pow(beta, alpha)).epsilon(1e-12));
}

TEST_CASE("fractional powers") {
  const auto sd = full_spectrum(neumann_fixture(60));
  const OperatorDisc& op = *sd->op;
  std::mt19937_64 rng(31);
  const Vec u = random_vec(sd->n(), rng);
  CHECK(l2_dist(op, fractional_apply(*sd, 1.0, u), apply_op(op, u)) <= 1e-9 * l2_norm(op, apply_op(op, u)));
  for (std::size_t j : {0u, 3u, 20u}) {
    Vec want = mode(*sd, j);
    for (double& x : want) x *= std::pow(sd->eigenvalues[j], 0.3);
    CHECK(l2_dist(op, fractional_apply(*sd, 0.3, mode(*sd, j)), want) < 1e-9 * std::pow(sd->eigenvalues[j], 0.3));
  }
  const Vec half = fractional_apply(*sd, 0.5, u);
  CHECK(l2_dist(op, fractional_apply(*sd, 0.5, half), apply_op(op, u)) <= 1e-9 * l2_norm(op, apply_op(op, u)));
  CHECK_THROWS_AS(fractional_apply(*sd, 0.0, u), InvalidInput);
  CHECK_THROWS_AS(fractional_norm(*sd, 1.5, u), InvalidInput);
}

TEST_CASE("linear estimates: decay constant is exactly one, synthetic coupling items vanish") {
  ProblemParams prm;
  prm.lambda = 1.0;
  prm.V0 = -0.5;
  const double eps = 0.1;
  const Grid g = Grid::uniform(400);
  const auto sd = full_spectrum(assemble(g, homogenization_coefficients(g, prm, eps)));
  const SpectralSplit sp = split(sd, 1);
  const LimitOperator limit = limit_operator(ProblemTag::homogenization, prm);
  const CouplingPair cp = make_coupling(*sd->op, prm);
  const Vec times{0.01, 0.1, 1.0};
  const EstimateReport rep = verify_linear_estimates(sp, limit, cp, times, 8, 0.5, 0.05, 1);
  REQUIRE(rep.rows.size() == 7);
  CHECK(rep.rows[0].item == "i_decay_Z");
  CHECK(rep.rows[0].measured_M == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.to_csv().rfind("# linear_estimates v1", 0) == 0);

  ProblemParams sp_prm = localized_params(0.1);
  sp_prm.synthetic_tail = 30;
  const auto ssd = full_spectrum(assemble_synthetic(sp_prm, 0.01));
  const SpectralSplit ssp = split(ssd, 2);
  const LimitOperator slim = limit_operator(ProblemTag::synthetic, sp_prm);
  const CouplingPair scp = make_coupling(*ssd->op, sp_prm);
  const EstimateReport srep = verify_linear_estimates(ssp, slim, scp, times, 8, 0.5, 0.0, 1);
  for (const auto& r : srep.rows)
    if (r.item == "vi_Y_vs_limit_backward" || r.item == "vii_Y_vs_limit_forward")
      CHECK(r.measured_M == 0.0);
}

}  // TEST_SUITE
