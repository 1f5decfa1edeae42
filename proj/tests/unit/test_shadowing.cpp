#include <doctest.h>

#include <cmath>
#include <random>

#include "alab/error.hpp"
#include "alab/shadowing.hpp"
#include "support.hpp"

using namespace alab;
using namespace testing;

namespace {

DiscreteMap linear_diag(double a, double b) {
  DiscreteMap m = make_map(
      2, [a, b](std::span<const double> x) { return Vec{a * x[0], b * x[1]}; }, Vec{-10, -10}, Vec{10, 10});
  m.jac = [a, b](std::span<const double>) { return std::vector<double>{a, 0, 0, b}; };
  return m;
}

std::vector<Vec> pseudo_orbit(const DiscreteMap& m, Vec x0, std::size_t K, double delta, bool aligned,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Vec> seq{x0};
  Vec dir(m.n);
  for (auto& v : dir) v = g(rng);
  for (std::size_t k = 0; k < K; ++k) {
    if (!aligned)
      for (auto& v : dir) v = g(rng);
    const double nd = m.norm(dir);
    Vec nx = m.T(seq.back());
    for (std::size_t i = 0; i < m.n; ++i) nx[i] += delta * dir[i] / nd;
    seq.push_back(nx);
  }
  return seq;
}

// Shadow of a pseudo-orbit of diag(1/2, 2): the stable coordinate is matched at the start and
// run forward, the unstable one matched at the end and run backward.
double closed_form_distance(const std::vector<Vec>& x) {
  const std::size_t K = x.size() - 1;
  std::vector<double> ds(K + 1, 0.0), du(K + 1, 0.0);
  for (std::size_t k = 0; k < K; ++k) ds[k + 1] = 0.5 * ds[k] + (x[k + 1][0] - 0.5 * x[k][0]);
  for (std::size_t k = K; k-- > 0;) du[k] = (du[k + 1] - (x[k + 1][1] - 2.0 * x[k][1])) / 2.0;
  double m = 0.0;
  for (std::size_t k = 0; k <= K; ++k) m = std::max(m, std::hypot(ds[k], du[k]));
  return m;
}

Map limit_scalar_map() {
  // Time-one map of u' = -0.5 u + u - u^3, the homogenized scalar limit.
  VectorField F;
  F.n = 1;
  F.eval = [](std::span<const double> z) { return Vec{0.5 * z[0] - z[0] * z[0] * z[0]}; };
  return time_one_map(F);
}

}  // namespace

TEST_SUITE("shadowing") {

TEST_CASE("defect") {
  const DiscreteMap m = linear_diag(0.5, 2.0);
  std::vector<Vec> orbit{{1.0, 0.01}};
  for (int k = 0; k < 5; ++k) orbit.push_back(m.T(orbit.back()));
  CHECK(defect(m, orbit) == 0.0);
  std::mt19937_64 rng(1);
  const auto p = pseudo_orbit(m, Vec{1.0, 0.01}, 10, 1e-3, false, rng);
  CHECK(defect(m, p) <= 1e-3 * (1 + 1e-12));
  CHECK(defect(m, p) >= 1e-3 * (1 - 1e-12));
}

TEST_CASE("contraction x/2: shadowing distance at most 2 delta") {
  DiscreteMap m = make_map(1, [](std::span<const double> x) { return Vec{0.5 * x[0]}; }, Vec{-5}, Vec{5});
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const double delta = 1e-3;
    const auto p = pseudo_orbit(m, Vec{1.0}, 50, delta, t % 2 == 0, rng);
    const ShadowResult r = shadow(m, p);
    REQUIRE(r.converged);
    CHECK(r.distance <= 2 * delta * (1 + 1e-9));
    CHECK(r.residual <= 1e-10);
  }
}

TEST_CASE("hyperbolic linear map matches the closed-form shadow") {
  const DiscreteMap m = linear_diag(0.5, 2.0);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const double delta = 1e-3;
    const bool aligned = t % 2 == 0;
    const auto p = pseudo_orbit(m, Vec{0.7, 1e-3}, 40, delta, aligned, rng);
    const ShadowResult r = shadow(m, p);
    REQUIRE(r.converged);
    CHECK(std::abs(r.distance - closed_form_distance(p)) <= 1e-8);
    CHECK(defect(m, r.orbit) <= 1e-10);
    // A fixed defect direction splits into a forward sum on the stable axis and a backward sum
    // on the unstable one, bounded by 2 delta; varying directions can combine both sums.
    CHECK(r.distance <= (aligned ? 2.0 : std::sqrt(5.0)) * delta * (1 + 1e-9));
  }
}

TEST_CASE("exact orbit is its own shadow") {
  const DiscreteMap m = linear_diag(0.5, 2.0);
  std::vector<Vec> orbit{{1.0, 1e-6}};
  for (int k = 0; k < 20; ++k) orbit.push_back(m.T(orbit.back()));
  const ShadowResult r = shadow(m, orbit);
  CHECK(r.converged);
  CHECK(r.distance <= 1e-10);
}

TEST_CASE("hyperbolicity gate") {
  const DiscreteMap id = linear_diag(1.0, 0.5);
  CHECK(!hyperbolic_fixed_points(id, {Vec{0.0, 0.0}}));
  CHECK_THROWS_AS(lpsp_estimate(id, {Vec{0.0, 0.0}}, 4, 1e-3, 1), RegimeError);
  CHECK(hyperbolic_fixed_points(linear_diag(0.5, 2.0), {Vec{0.0, 0.0}}));
}

TEST_CASE("LpSP estimate of a contraction by one half stays at or below 2") {
  DiscreteMap m = make_map(1, [](std::span<const double> x) { return Vec{0.5 * x[0]}; }, Vec{-1}, Vec{1});
  const LpspEstimate est = lpsp_estimate(m, {Vec{0.0}}, 20, 1e-3, 5, 100);
  CHECK(est.failures == 0);
  CHECK(est.L_hat <= 2.0 + 1e-9);
  CHECK(est.L_hat > 1.0);
  CHECK(est.to_csv().find("converged") != std::string::npos);
}

TEST_CASE("LpSP estimate of the scalar limit map is finite and stable") {
  const Map S0 = limit_scalar_map();
  const double r = 1.0 / std::sqrt(2.0);
  const DiscreteMap m = make_map(1, S0, Vec{-1.5 * r}, Vec{1.5 * r}, Vec{0.5});
  const std::vector<Vec> fps{{-r}, {0.0}, {r}};
  const LpspEstimate est = lpsp_estimate(m, fps, 100, 1e-3 * 2 * r, 9, 200);
  CHECK(est.failures == 0);
  CHECK(std::isfinite(est.L_hat));
  double half = 0.0;
  for (std::size_t t = 0; t < 50; ++t) half = std::max(half, est.log[t].ratio);
  CHECK(est.L_hat <= 1.5 * half);
}

TEST_CASE("attractor bound verdicts") {
  const BoundVerdict same = attractor_bound(0.0, 0.0, 2.0, true, 1e-3);
  CHECK(same.applicable);
  CHECK(same.pass);
  CHECK(!attractor_bound(0.0, 0.0, 2.0, false, 1e-3).applicable);
  CHECK(!attractor_bound(0.0, 0.1, 2.0, true, 1e-3).applicable);
  CHECK(!attractor_bound(1e-3, 1e-4, 2.0, true, 1e-3).pass);
}

TEST_CASE("shifted scalar map: attractor endpoints move as Newton predicts and the bound holds") {
  const Map S0 = limit_scalar_map();
  const double r = 1.0 / std::sqrt(2.0);
  const DiscreteMap m = make_map(1, S0, Vec{-1.5 * r}, Vec{1.5 * r});
  const LpspEstimate est = lpsp_estimate(m, {Vec{-r}, Vec{0.0}, Vec{r}}, 20, 1e-3, 4, 200);
  const ScalarMapAttractor A0 = scalar_map_attractor(S0, -1.5 * r, 1.5 * r);
  CHECK(A0.lo == doctest::Approx(-r).epsilon(1e-8));
  CHECK(A0.hi == doctest::Approx(r).epsilon(1e-8));
  for (double c : {2e-4, -5e-4}) {
    const Map S1 = [&S0, c](std::span<const double> x) { return Vec{S0(x)[0] + c}; };
    const ScalarMapAttractor A1 = scalar_map_attractor(S1, -1.5 * r, 1.5 * r);
    // Newton on S0(x) + c - x = 0 from each endpoint.
    auto newton = [&](double x) {
      for (int it = 0; it < 50; ++it) {
        const double h = 1e-6;
        const double g = S1(Vec{x})[0] - x;
        const double dg = (S1(Vec{x + h})[0] - S1(Vec{x - h})[0]) / (2 * h) - 1.0;
        x -= g / dg;
      }
      return x;
    };
    CHECK(A1.lo == doctest::Approx(newton(-r)).epsilon(1e-8));
    CHECK(A1.hi == doctest::Approx(newton(r)).epsilon(1e-8));
    const double dist = std::max(std::abs(A1.lo - A0.lo), std::abs(A1.hi - A0.hi));
    const BoundVerdict v = attractor_bound(dist, std::abs(c), est.L_hat, true, 1e-3);
    CHECK(v.pass);
    CHECK(v.margin > 0.0);
  }
}

}  // TEST_SUITE
