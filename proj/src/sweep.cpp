#include "alab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "alab/attractor.hpp"
#include "alab/coupling.hpp"
#include "alab/dynamics.hpp"
#include "alab/error.hpp"
#include "alab/isomorphism.hpp"
#include "alab/manifold.hpp"
#include "alab/shadowing.hpp"

namespace alab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ------------------------------------------------------------------ rows

const std::vector<std::string>& row_columns() {
  static const std::vector<std::string> cols = {
      "lambda1",       "lambda2",        "lambda3",        "lambda4",        "tau_hat",
      "tau_half",      "rho_hat",        "tau_plus_rho",   "proj_gap",       "norm_ratio",
      "estimates_pass", "estimates_max_M", "rho_f",         "contraction",    "manifold_sup",
      "manifold_lip",  "fp_iterations",  "fp_increment",   "tail_estimate",  "map_sup_gap",
      "d_eps",         "d_eps_ab",       "d_eps_ba",       "invariance",     "eq_count",
      "eq_dist_max",   "shadow_gap",     "d_rn",           "shadow_bound",   "shadow_pass"};
  return cols;
}

namespace {

std::size_t column_index(const std::string& c) {
  const auto& cols = row_columns();
  const auto it = std::find(cols.begin(), cols.end(), c);
  if (it == cols.end()) throw InvalidInput("unknown column '" + c + "'");
  return static_cast<std::size_t>(it - cols.begin());
}

}  // namespace

double SweepRow::get(const std::string& column) const {
  if (column == "eq_dist") return get("eq_dist_max");
  return values[column_index(column)];
}

void SweepRow::set(const std::string& column, double v) { values[column_index(column)] = v; }

SweepRow empty_row(double epsilon) {
  SweepRow r;
  r.epsilon = epsilon;
  r.values.assign(row_columns().size(), kNaN);
  return r;
}

bool ConvergenceReport::all_pass() const {
  return std::all_of(rules.begin(), rules.end(), [](const RuleResult& r) { return r.pass; });
}

namespace {

json row_to_json(const SweepRow& r) {
  json j;
  j["epsilon"] = r.epsilon;
  j["status"] = r.status;
  j["reason"] = r.reason;
  json v = json::object();
  const auto& cols = row_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    v[cols[i]] = std::isfinite(r.values[i]) ? json(r.values[i]) : json(nullptr);
  j["values"] = v;
  j["eq_dist"] = r.eq_dist;
  return j;
}

SweepRow row_from_json(const json& j) {
  SweepRow r = empty_row(j.at("epsilon").get<double>());
  r.status = j.at("status").get<std::string>();
  r.reason = j.at("reason").get<std::string>();
  for (const auto& [k, v] : j.at("values").items())
    if (!v.is_null()) r.set(k, v.get<double>());
  r.eq_dist = j.at("eq_dist").get<std::vector<double>>();
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string eps_dir_name(double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "eps_%.6g", eps);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Quantities shared by every epsilon point.
struct SweepContext {
  const SweepConfig& cfg;
  FSpec f;
  LimitOperator limit;
  LimitSpectrum lspec;
  Vec limit_weights;  // X^{1/2} weights of the limit coordinates
  // Dynamics only.
  VectorField F0;
  EquilibriumSet eq0;
  AttractorCloud A0;
  Vec box_lo, box_hi;
  Map S0;
  double delta0 = 0.0;
  bool dynamics = false;
  ShadowingSummary shadowing;

  explicit SweepContext(const SweepConfig& c)
      : cfg(c),
        f(FSpec::cubic_cutoff(c.R_cut, c.cutoff_width)),
        limit(limit_operator(c.problem, c.params)),
        lspec(limit_spectrum(limit)),
        limit_weights(lspec.eigenvalues) {}
};

void prepare_dynamics(SweepContext& ctx, const fs::path& run_dir) {
  const SweepConfig& cfg = ctx.cfg;
  const std::size_t n = ctx.limit.n_dim;
  ctx.F0 = limit_field(ctx.limit, ctx.f);
  const Vec elo(n, -cfg.numerics.eq_box), ehi(n, cfg.numerics.eq_box);
  ctx.eq0 = find_equilibria(ctx.F0, elo, ehi);
  if (ctx.eq0.points.empty()) throw RegimeError("limit flow has no equilibria in the seed box");
  ctx.A0 = attractor_approximate(ctx.F0, ctx.eq0);
  ctx.box_lo.assign(n, std::numeric_limits<double>::max());
  ctx.box_hi.assign(n, std::numeric_limits<double>::lowest());
  for (const auto& p : ctx.A0.points)
    for (std::size_t k = 0; k < n; ++k) {
      ctx.box_lo[k] = std::min(ctx.box_lo[k], p[k]);
      ctx.box_hi[k] = std::max(ctx.box_hi[k], p[k]);
    }
  for (std::size_t k = 0; k < n; ++k) {
    const double c = 0.5 * (ctx.box_lo[k] + ctx.box_hi[k]);
    // A point attractor still needs a box of positive width.
    const double h = std::max(0.5 * (ctx.box_hi[k] - ctx.box_lo[k]) * cfg.numerics.box_inflation,
                              0.05 * (1.0 + std::abs(c)));
    ctx.box_lo[k] = c - h;
    ctx.box_hi[k] = c + h;
  }
  ctx.S0 = time_one_map(ctx.F0);
  ctx.delta0 = cfg.numerics.delta0 > 0 ? cfg.numerics.delta0 : 1e-3 * ctx.A0.diameter();
  if (!(ctx.delta0 > 0)) ctx.delta0 = 1e-3;
  ctx.dynamics = true;
  write_file(run_dir / "limit_equilibria.csv", equilibria_csv(ctx.eq0));
  write_file(run_dir / "limit_attractor.csv", cloud_csv(ctx.A0));

  if (!cfg.stages.shadowing) return;
  ShadowingSummary& sh = ctx.shadowing;
  try {
    DiscreteMap map = make_map(n, ctx.S0, ctx.box_lo, ctx.box_hi, ctx.limit_weights);
    std::vector<Vec> fps;
    for (const auto& e : ctx.eq0.points) fps.push_back(e.z);
    const LpspEstimate est = lpsp_estimate(map, fps, cfg.numerics.lpsp_trials, ctx.delta0,
                                           cfg.seed, cfg.numerics.lpsp_segment);
    sh.computed = true;
    sh.L_hat = est.L_hat;
    sh.trials = est.trials;
    sh.failures = est.failures;
    if (est.low_confidence) sh.note = "some trials did not converge (low confidence)";
    write_file(run_dir / "lpsp_trials.csv", est.to_csv());
  } catch (const RegimeError& e) {
    sh.computed = false;
    sh.note = e.what();
  }
}

std::shared_ptr<const OperatorDisc> build_operator(const SweepConfig& cfg, double eps) {
  if (cfg.problem == ProblemTag::synthetic)
    return std::make_shared<const OperatorDisc>(assemble_synthetic(cfg.params, eps));
  const Grid g = Grid::uniform(cfg.n_cells);
  const Coefficients c = cfg.problem == ProblemTag::homogenization
                             ? homogenization_coefficients(g, cfg.params, eps)
                             : localized_coefficients(g, cfg.params, eps);
  return std::make_shared<const OperatorDisc>(assemble(g, c));
}

std::size_t mode_count(const SweepConfig& cfg, std::size_t size, std::size_t n) {
  if (cfg.numerics.modes > 0) return std::min(cfg.numerics.modes, size);
  if (size <= 2501) return size;
  return std::min(size, n + cfg.numerics.tail + 64);
}

void note(SweepRow& row, const std::string& status, const std::string& why) {
  row.status = status;
  row.reason = row.reason.empty() ? why : row.reason + "; " + why;
}

// Stages after the spectral ones. Regime failures downgrade the row to partial.
void dynamics_stage(const SweepContext& ctx, const SpectralSplit& sp, const CouplingPair& cp,
                    const OperatorDisc& op, double eps, SweepRow& row, const fs::path& dir) {
  const SweepConfig& cfg = ctx.cfg;
  const Numerics& nm = cfg.numerics;
  const std::size_t n = ctx.limit.n_dim;

  // Equilibrium distances do not need the manifold.
  row.eq_dist.clear();
  double eq_max = 0.0;
  for (const auto& e : ctx.eq0.points) {
    Vec u0(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) u0[i] += e.z[j] * ctx.lspec.vectors[j * n + i];
    const EquilibriumDistance d = equilibrium_rate(u0, op, cp, ctx.f);
    row.eq_dist.push_back(d.converged ? d.distance : kNaN);
    if (d.converged) eq_max = std::max(eq_max, d.distance);
  }
  row.set("eq_dist_max", eq_max);

  const ManifoldSetup ms = make_manifold_setup(sp, ctx.limit, cp, ctx.f, nm.tail);
  const double rf = local_rho_f(ms, ctx.box_lo, ctx.box_hi);
  const ManifoldConstants mc = evaluate_constants(
      sp.gap.upper, ctx.lspec.eigenvalues.back() + nm.delta, rf, 1.0, nm.Delta);
  row.set("rho_f", rf);
  row.set("contraction", mc.contraction);
  if (!mc.all_hold()) {
    const Inequality* bad = mc.first_failure();
    std::ostringstream os;
    os << "manifold regime: '" << bad->name << "' fails (" << bad->lhs << " vs " << bad->rhs << ")";
    note(row, "partial", os.str());
    return;
  }
  TransformParams tp = transform_params(mc, sp.gap.lower, nm.fixed_point_tol);
  tp.threads = nm.threads;
  GraphSection s0 = zero_section(n, ms.m(), ctx.box_lo, ctx.box_hi, nm.section_pts);
  s0.epsilon = eps;
  FixedPointResult fp;
  try {
    fp = solve_fixed_point(s0, ms, tp, nm.max_iter);
  } catch (const RegimeError& e) {
    note(row, "partial", std::string("graph transform: ") + e.what());
    return;
  } catch (const ConvergenceError& e) {
    note(row, "partial", std::string("graph transform: ") + e.what());
    return;
  }
  row.set("manifold_sup", fp.section.sup_norm);
  row.set("manifold_lip", fp.section.lip_bound);
  row.set("fp_iterations", static_cast<double>(fp.iterations));
  row.set("fp_increment", fp.last_increment);
  row.set("tail_estimate", fp.diag.tail_estimate);
  {
    std::ostringstream os;
    write_section(os, fp.section);
    write_file(dir / "section.txt", os.str());
  }

  const ReducedField red = make_reduced_field(fp.section, ms);
  const Vec elo(n, -nm.eq_box), ehi(n, nm.eq_box);
  const EquilibriumSet eqe = find_equilibria(red.field, elo, ehi);
  row.set("eq_count", static_cast<double>(eqe.points.size()));
  write_file(dir / "equilibria.csv", equilibria_csv(eqe));
  if (eqe.points.empty()) {
    note(row, "partial", "reduced flow has no equilibria in the seed box");
    return;
  }
  const AttractorCloud Ae = attractor_approximate(red.field, eqe);
  write_file(dir / "attractor.csv", cloud_csv(Ae));
  const Map S1 = time_one_map(red.field);
  const std::size_t pts = nm.sup_gap_pts ? nm.sup_gap_pts : (n == 1 ? 41 : 15);
  row.set("map_sup_gap", map_sup_gap(S1, ctx.S0, ctx.box_lo, ctx.box_hi, ms.iso.weights, pts));
  const HausdorffResult hd = attractor_distance(ms, fp.section, Ae, ctx.A0);
  row.set("d_eps", hd.d());
  row.set("d_eps_ab", hd.ab);
  row.set("d_eps_ba", hd.ba);
  row.set("invariance", invariance_residual(Ae, S1, ms.iso.weights));

  const double sg = map_sup_gap(S1, ctx.S0, ctx.box_lo, ctx.box_hi, ctx.limit_weights, pts);
  const double drn = set_distance(Ae, ctx.A0, ctx.limit_weights).d();
  row.set("shadow_gap", sg);
  row.set("d_rn", drn);
  if (ctx.shadowing.computed) {
    const BoundVerdict v =
        attractor_bound(drn, sg, ctx.shadowing.L_hat, true, ctx.delta0);
    if (v.applicable) {
      row.set("shadow_bound", v.bound);
      row.set("shadow_pass", v.pass ? 1.0 : 0.0);
    } else {
      note(row, row.status, "shadowing bound " + v.note);
    }
  }
}

SweepRow compute_row(const SweepContext& ctx, double eps, const fs::path& dir) {
  const SweepConfig& cfg = ctx.cfg;
  const Numerics& nm = cfg.numerics;
  SweepRow row = empty_row(eps);
  const std::size_t n = ctx.limit.n_dim;
  try {
    const auto op = build_operator(cfg, eps);
    const auto sd = std::make_shared<const SpectralData>(eigendecompose(op, mode_count(cfg, op->size(), n)));
    for (std::size_t k = 0; k < 4 && k < sd->count(); ++k)
      row.set("lambda" + std::to_string(k + 1), sd->eigenvalues[k]);
    const CouplingPair cp = make_coupling(*op, cfg.params);
    const SpectralSplit sp = split(sd, n);
    const ResolventGapResult rg =
        resolvent_gap(*op, *sd, ctx.limit, cp, nm.spectral_probes, nm.random_probes, cfg.seed,
                      nm.power_steps);
    row.set("tau_hat", rg.tau_hat);
    row.set("tau_half", rg.tau_half);
    const Vec lo(n, -nm.rho_box), hi(n, nm.rho_box);
    const double rho = nonlinearity_gap(*op, ctx.f, cp, lo, hi, nm.rho_samples);
    row.set("rho_hat", rho);
    row.set("tau_plus_rho", rg.tau_hat + rho);
    row.set("proj_gap", projection_gap(sp, ctx.limit, cp));
    if (cfg.problem != ProblemTag::synthetic)
      row.set("norm_ratio", norm_nonequivalence(*op, nm.norm_probes, nm.norm_probes, cfg.seed));
    row.status = "complete";
    if (cfg.stages.estimates) {
      const EstimateReport er = verify_linear_estimates(sp, ctx.limit, cp, nm.estimate_times,
                                                        nm.estimate_samples, nm.delta, rg.tau_hat,
                                                        cfg.seed);
      double mmax = 0.0;
      for (std::size_t i = 0; i < 5 && i < er.rows.size(); ++i)
        mmax = std::max(mmax, er.rows[i].measured_M);
      row.set("estimates_pass", er.all_pass() ? 1.0 : 0.0);
      row.set("estimates_max_M", mmax);
      write_file(dir / "estimates.csv", er.to_csv());
    }
    if (cfg.stages.dynamics) {
      if (!ctx.dynamics)
        note(row, "partial", "limit dynamics unavailable");
      else
        dynamics_stage(ctx, sp, cp, *op, eps, row, dir);
    }
  } catch (const RegimeError& e) {
    if (row.status == "skipped")
      note(row, "skipped", e.what());
    else
      note(row, "partial", e.what());
  } catch (const ConvergenceError& e) {
    if (row.status == "skipped")
      note(row, "skipped", e.what());
    else
      note(row, "partial", e.what());
  }
  return row;
}

}  // namespace

ConvergenceReport run_sweep(const SweepConfig& cfg, const fs::path& run_dir,
                            const SweepOptions& opt) {
  validate(cfg);
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw Error("cannot create output directory '" + run_dir.string() + "': " + ec.message());
  const std::string canon = config_to_json(cfg);
  const fs::path cfg_path = run_dir / "config.json";
  bool reuse = opt.resume;
  if (fs::exists(cfg_path)) {
    if (read_file(cfg_path) != canon) {
      if (opt.resume)
        throw InvalidInput("run directory '" + run_dir.string() +
                           "' holds a different config; pick another output_dir or rerun with --fresh");
      reuse = false;
    }
  }
  write_file(cfg_path, canon);  // also proves the directory is writable

  ConvergenceReport rep;
  rep.config = cfg;
  SweepContext ctx(cfg);
  if (cfg.stages.dynamics) {
    try {
      prepare_dynamics(ctx, run_dir);
    } catch (const RegimeError& e) {
      ctx.dynamics = false;
      if (opt.log) *opt.log << "limit dynamics unavailable: " << e.what() << "\n";
    }
  }
  rep.shadowing = ctx.shadowing;

  const std::size_t count = cfg.epsilons.size();
  rep.rows.resize(count);
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        const double eps = cfg.epsilons[i];
        const fs::path dir = run_dir / eps_dir_name(eps);
        const fs::path row_path = dir / "row.json";
        const auto t0 = std::chrono::steady_clock::now();
        bool loaded = false;
        if (reuse && fs::exists(row_path)) {
          rep.rows[i] = row_from_json(json::parse(read_file(row_path)));
          loaded = true;
        } else {
          fs::create_directories(dir);
          rep.rows[i] = compute_row(ctx, eps, dir);
          write_file(row_path, row_to_json(rep.rows[i]).dump(1) + "\n");
        }
        if (opt.log) {
          std::lock_guard<std::mutex> lk(log_mu);
          *opt.log << "eps " << eps << ": " << rep.rows[i].status
                   << (loaded ? " (resumed)" : "") << " in " << seconds_since(t0) << " s";
          if (!rep.rows[i].reason.empty()) *opt.log << " [" << rep.rows[i].reason << "]";
          *opt.log << std::endl;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(log_mu);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.numerics.jobs, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  evaluate(rep);
  return rep;
}

}  // namespace alab
