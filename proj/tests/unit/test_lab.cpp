#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "alab/config.hpp"
#include "alab/error.hpp"
#include "alab/fit.hpp"
#include "alab/report.hpp"
#include "alab/sweep.hpp"

using namespace alab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alab_unit_" + name);
  fs::remove_all(p);
  return p;
}

// Small homogenization sweep with every stage on; a few seconds per run.
SweepConfig small_sweep() {
  return parse_config(R"({
    "name": "small",
    "problem": "homogenization",
    "params": {"lambda": 1.0, "V0": -0.5},
    "epsilons": [0.2, 0.1, 0.05],
    "n_cells": 300,
    "seed": 3,
    "numerics": {"tail": 60, "section_pts": 17, "estimate_samples": 6, "lpsp_trials": 6,
                 "lpsp_segment": 60, "rho_samples": 5}
  })");
}

}  // namespace

TEST_SUITE("lab") {

TEST_CASE("rate fit recovers exact power laws") {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y, c(eps.size(), 4.2);
  for (double e : eps) y.push_back(3.0 * std::sqrt(e));
  const RateFit f = fit_rate(eps, y);
  CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.used == 5);
  const RateFit k = fit_rate(eps, c);
  CHECK(std::abs(k.slope) < 1e-12);
  CHECK(k.r2 == 1.0);
}

TEST_CASE("rate fit excludes nonpositive points with a note and needs three") {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  const std::vector<double> y{0.2, 0.0, 0.05, NAN};
  CHECK(usable_points(eps, y) == 2);
  CHECK_THROWS_AS(fit_rate(eps, y), InvalidInput);
  const std::vector<double> y2{0.4, -1.0, 0.1, 0.05};
  const RateFit f = fit_rate(eps, y2);
  CHECK(f.excluded == 1);
  CHECK(!f.note.empty());
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate(std::vector<double>{0.1, 0.1, 0.1}, std::vector<double>{1, 2, 3}), InvalidInput);
}

TEST_CASE("config rejects unknown keys with their path") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"name": "x", "epsilons": [0.1], "bogus": 1})"),
                       doctest::Contains("bogus"), InvalidInput);
  CHECK_THROWS_WITH_AS(parse_config(R"({"name": "x", "epsilons": [0.1], "numerics": {"tails": 3}})"),
                       doctest::Contains("numerics.tails"), InvalidInput);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"name": "x", "epsilons": [0.1], "rules": [{"id": "a", "kind": "max", "column": "tau_hat", "mx": 1}]})"),
      doctest::Contains("mx"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{not json"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"name": "x", "epsilons": "0.1"})"), InvalidInput);
}

TEST_CASE("config validation") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"name": "x", "epsilons": [0.1, 0.2]})"),
                       doctest::Contains("descending"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"name": "x", "epsilons": []})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"name": "x", "epsilons": [2.0]})"), InvalidInput);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"name": "x", "problem": "localized", "epsilons": [0.01], "n_cells": 200})"),
      doctest::Contains("n_cells >= 400"), InvalidInput);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"name": "x", "epsilons": [0.1], "rules": [{"id": "a", "kind": "max", "column": "nope"}]})"),
      doctest::Contains("unknown column"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"name": "x", "problem": "other", "epsilons": [0.1]})"), InvalidInput);
}

TEST_CASE("config canonical form round trips and defaults carry the acceptance rules") {
  const SweepConfig c = small_sweep();
  const std::string canon = config_to_json(c);
  CHECK(config_to_json(parse_config(canon)) == canon);
  CHECK(c.rules.size() == default_rules(ProblemTag::homogenization).size());
  bool has_tau = false;
  for (const auto& r : c.rules)
    if (r.id == "resolvent_rate") {
      has_tau = true;
      CHECK(r.min == 0.4);
      CHECK(r.max == 0.6);
      CHECK(r.min_r2 == 0.98);
    }
  CHECK(has_tau);
  const auto syn = default_rules(ProblemTag::synthetic);
  REQUIRE(syn.size() == 1);
  CHECK(syn[0].max == 1e-8);
  CHECK(syn[0].columns.size() == 6);
}

TEST_CASE("output root override") {
  SweepConfig c = small_sweep();
  c.output_dir = "runs/abc";
  unsetenv(kOutputRootEnv);
  CHECK(resolve_output_dir(c) == fs::path("runs/abc"));
  setenv(kOutputRootEnv, "/tmp/root_x", 1);
  CHECK(resolve_output_dir(c) == fs::path("/tmp/root_x/runs/abc"));
  unsetenv(kOutputRootEnv);
}

TEST_CASE("run.csv round trip, versioned header, empty sweep") {
  std::vector<SweepRow> rows;
  SweepRow a = empty_row(0.1);
  a.status = "complete";
  a.set("tau_hat", 0.123456789012345678);
  a.set("lambda1", 1.0);
  a.eq_dist = {0.0, 1.5e-3};
  SweepRow b = empty_row(0.05);
  b.status = "partial";
  b.reason = "manifold regime: 'x, y' fails\nsecond line";
  rows = {a, b};
  const std::string text = run_csv(rows);
  CHECK(text.rfind("# run v1", 0) == 0);
  const auto back = parse_run_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].get("tau_hat") == a.get("tau_hat"));
  CHECK(std::isnan(back[0].get("rho_hat")));
  CHECK(back[0].eq_dist == a.eq_dist);
  CHECK(back[1].status == "partial");
  CHECK(back[1].reason.find('\n') == std::string::npos);
  CHECK(run_csv(back) == text);

  std::string v2 = text;
  v2.replace(0, 8, "# run v2");
  CHECK_THROWS_AS(parse_run_csv(v2), InvalidInput);

  const std::string empty = run_csv({});
  CHECK(parse_run_csv(empty).empty());
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 2);
  ConvergenceReport rep;
  rep.config = small_sweep();
  CHECK(summary_text(rep).find("no rows") != std::string::npos);
}

TEST_CASE("report refuses an unwritable directory") {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  ConvergenceReport rep;
  rep.config = small_sweep();
  CHECK_THROWS_AS(emit_report(rep, blocker / "sub"), Error);
  CHECK_THROWS_AS(run_sweep(small_sweep(), blocker / "sub"), Error);
  fs::remove(blocker);
}

TEST_CASE("sweep is deterministic, resumable and reproducible from its files") {
  const SweepConfig cfg = small_sweep();
  const fs::path d1 = scratch("run1"), d2 = scratch("run2");
  SweepOptions fresh;
  fresh.resume = false;
  const ConvergenceReport r1 = run_sweep(cfg, d1, fresh);
  emit_report(r1, d1);
  const ConvergenceReport r2 = run_sweep(cfg, d2, fresh);
  emit_report(r2, d2);
  for (const char* f : {"run.csv", "rates.csv", "rules.csv", "summary.txt"}) {
    CAPTURE(f);
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  for (const auto& row : r1.rows) CHECK(row.status == "complete");
  CHECK(r1.shadowing.computed);

  // Drop one persisted row and resume: only that point is recomputed, bytes unchanged.
  const std::string before = slurp(d1 / "run.csv");
  fs::remove(d1 / "eps_0.1" / "row.json");
  const ConvergenceReport r3 = run_sweep(cfg, d1);
  emit_report(r3, d1);
  CHECK(slurp(d1 / "run.csv") == before);
  for (std::size_t i = 0; i < r1.rows.size(); ++i)
    for (std::size_t k = 0; k < row_columns().size(); ++k) {
      const double x = r1.rows[i].values[k], y = r3.rows[i].values[k];
      CHECK((std::isnan(x) ? std::isnan(y) : std::abs(x - y) <= 1e-12 * (1 + std::abs(x))));
    }

  // Concurrent epsilon points give the same bytes.
  SweepConfig par = cfg;
  par.numerics.jobs = 2;
  const fs::path d3 = scratch("run3");
  const ConvergenceReport r4 = run_sweep(par, d3, fresh);
  CHECK(run_csv(r4.rows) == before);

  // A different config in the same directory is refused unless fresh.
  SweepConfig other = cfg;
  other.seed = 4;
  CHECK_THROWS_AS(run_sweep(other, d1), InvalidInput);

  // Report files are regenerated identically from the run directory.
  const std::string rates = slurp(d1 / "rates.csv"), rules = slurp(d1 / "rules.csv");
  const ConvergenceReport loaded = load_report(d1);
  emit_report(loaded, d1);
  CHECK(slurp(d1 / "rates.csv") == rates);
  CHECK(slurp(d1 / "rules.csv") == rules);
  CHECK(fs::exists(d1 / "plot" / "tau_hat.dat"));
  CHECK(fs::exists(d1 / "eps_0.05" / "estimates.csv"));
  CHECK(fs::exists(d1 / "lpsp_trials.csv"));

  const std::string header = slurp(d1 / "rates.csv").substr(0, 9);
  CHECK(header == "# rates v");
  for (const fs::path& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("rules evaluate on synthetic rows") {
  ConvergenceReport rep;
  rep.config = small_sweep();
  Rule slope;
  slope.id = "s";
  slope.kind = "slope";
  slope.column = "tau_hat";
  slope.min = 0.4;
  slope.max = 0.6;
  Rule q;
  q.id = "q";
  q.kind = "quotient";
  q.column = "manifold_sup";
  Rule z;
  z.id = "z";
  z.kind = "exact_zero";
  z.columns = {"proj_gap"};
  z.max = 1e-8;
  rep.config.rules = {slope, q, z};
  for (double e : {0.2, 0.1, 0.05, 0.025}) {
    SweepRow r = empty_row(e);
    r.status = "complete";
    r.set("tau_hat", 2 * std::sqrt(e));
    r.set("rho_hat", 0.0);
    r.set("tau_plus_rho", 2 * std::sqrt(e));
    r.set("manifold_sup", 0.1 * std::sqrt(e) * (1 + e));
    r.set("proj_gap", e);
    rep.rows.push_back(r);
  }
  evaluate(rep);
  REQUIRE(rep.rules.size() == 3);
  CHECK(rep.rules[0].pass);
  CHECK(rep.rules[0].measured == doctest::Approx(0.5));
  CHECK(rep.rules[1].pass);
  CHECK(!rep.rules[2].pass);
  CHECK(!rep.all_pass());
}

}  // TEST_SUITE
