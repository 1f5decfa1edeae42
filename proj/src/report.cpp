#include "alab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "alab/error.hpp"
#include "alab/isomorphism.hpp"
#include "alab/operators.hpp"

namespace alab {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  if (std::isnan(v)) return "-";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
  return s;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s) {
  if (s.empty()) return kNaN;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("run.csv: bad number '" + s + "'");
  }
  if (used != s.size()) throw InvalidInput("run.csv: bad number '" + s + "'");
  return v;
}

std::string run_header() {
  std::string h = "epsilon,status,reason";
  for (const auto& c : row_columns()) h += "," + c;
  return h + ",eq_dist";
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

const std::vector<std::string>& fit_columns() {
  static const std::vector<std::string> cols = {
      "lambda3", "tau_hat",      "rho_hat", "tau_plus_rho", "proj_gap", "norm_ratio",
      "manifold_sup", "map_sup_gap", "d_eps", "d_rn", "eq_dist_max"};
  return cols;
}

// ------------------------------------------------------------- rule checks

bool in_range(double v, const Rule& r) { return v >= r.min && v <= r.max; }

RuleResult check_slope(const ConvergenceReport& rep, const Rule& r) {
  RuleResult res{r.id, r.kind, false, kNaN, ""};
  std::vector<Series> all;
  if (r.column == "eq_dist") {
    std::size_t k = std::numeric_limits<std::size_t>::max();
    for (const auto& row : rep.rows)
      if (row.status != "skipped" && !row.eq_dist.empty()) k = std::min(k, row.eq_dist.size());
    if (k == std::numeric_limits<std::size_t>::max()) k = 0;
    for (std::size_t e = 0; e < k; ++e) {
      Series s;
      for (const auto& row : rep.rows)
        if (row.status != "skipped" && row.eq_dist.size() > e) {
          s.eps.push_back(row.epsilon);
          s.value.push_back(row.eq_dist[e]);
        }
      all.push_back(s);
    }
  } else {
    all.push_back(column_series(rep.rows, r.column));
  }
  if (all.empty()) {
    res.detail = "no values";
    return res;
  }
  std::ostringstream os;
  bool pass = true;
  double worst = kNaN, worst_off = -1.0;
  for (std::size_t s = 0; s < all.size(); ++s) {
    Series ser = all[s];
    for (auto& v : ser.value)
      if (r.square) v *= v;
    if (r.inverse)
      for (auto& e : ser.eps) e = 1.0 / e;
    if (all.size() > 1) os << "[" << s << "] ";
    // An equilibrium shared exactly by both problems has distance zero at every eps; it
    // satisfies any rate and carries no slope.
    if (r.column == "eq_dist" && !ser.value.empty() &&
        std::all_of(ser.value.begin(), ser.value.end(), [](double v) { return v == 0.0; })) {
      os << "identically zero; ";
      continue;
    }
    if (usable_points(ser.eps, ser.value) < 3) {
      pass = false;
      os << "fewer than 3 usable points; ";
      continue;
    }
    const RateFit f = fit_rate(ser.eps, ser.value);
    const bool ok = in_range(f.slope, r) && f.r2 >= r.min_r2;
    pass = pass && ok;
    const double mid = std::isfinite(r.min) && std::isfinite(r.max) ? 0.5 * (r.min + r.max) : f.slope;
    const double off = ok ? std::abs(f.slope - mid) : 1e300 + std::abs(f.slope - mid);
    if (off > worst_off) {
      worst_off = off;
      worst = f.slope;
    }
    os << "slope " << short_num(f.slope) << " +- " << short_num(f.slope_ci95) << " R2 "
       << short_num(f.r2) << " over " << f.used << " points";
    if (!f.note.empty()) os << " (" << f.note << ")";
    os << "; ";
  }
  os << "required [" << short_num(r.min) << ", " << short_num(r.max) << "]";
  if (r.min_r2 > 0) os << ", R2 >= " << short_num(r.min_r2);
  res.pass = pass;
  res.measured = worst;
  res.detail = os.str();
  return res;
}

std::vector<double> quotients(const ConvergenceReport& rep, const std::string& column) {
  std::vector<double> q;
  for (const auto& row : rep.rows) {
    if (row.status == "skipped") continue;
    const double v = row.get(column), d = row.get("tau_plus_rho");
    if (std::isfinite(v) && std::isfinite(d) && v > 0 && d > 0) q.push_back(v / d);
  }
  return q;
}

RuleResult check_quotient(const ConvergenceReport& rep, const Rule& r) {
  RuleResult res{r.id, r.kind, false, kNaN, ""};
  const auto q = quotients(rep, r.column);
  std::ostringstream os;
  if (q.size() < 3) {
    os << "fewer than 3 rows with " << r.column << " and tau_hat + rho_hat";
    res.detail = os.str();
    return res;
  }
  const auto [mn, mx] = std::minmax_element(q.begin(), q.end());
  res.measured = *mx / *mn;
  res.pass = res.measured <= r.max_ratio;
  os << r.column << " / (tau_hat + rho_hat) in [" << short_num(*mn) << ", " << short_num(*mx)
     << "], ratio " << short_num(res.measured) << " (max " << short_num(r.max_ratio) << ")";
  res.detail = os.str();
  return res;
}

RuleResult check_slope_match(const ConvergenceReport& rep, const Rule& r) {
  RuleResult res{r.id, r.kind, false, kNaN, ""};
  const Series a = column_series(rep.rows, r.column), b = column_series(rep.rows, r.reference);
  // Fit both columns over the same epsilons.
  Series aa, bb;
  for (std::size_t i = 0; i < a.eps.size(); ++i)
    for (std::size_t j = 0; j < b.eps.size(); ++j)
      if (a.eps[i] == b.eps[j] && a.value[i] > 0 && b.value[j] > 0) {
        aa.eps.push_back(a.eps[i]);
        aa.value.push_back(a.value[i]);
        bb.eps.push_back(b.eps[j]);
        bb.value.push_back(b.value[j]);
      }
  if (aa.eps.size() < 3) {
    res.detail = "fewer than 3 rows with both " + r.column + " and " + r.reference;
    return res;
  }
  const RateFit fa = fit_rate(aa.eps, aa.value), fb = fit_rate(bb.eps, bb.value);
  res.measured = std::abs(fa.slope - fb.slope);
  res.pass = res.measured <= r.max_diff;
  std::ostringstream os;
  os << "slope(" << r.column << ") " << short_num(fa.slope) << " vs slope(" << r.reference << ") "
     << short_num(fb.slope) << ", difference " << short_num(res.measured) << " (max "
     << short_num(r.max_diff) << ")";
  res.detail = os.str();
  return res;
}

RuleResult check_spectral(const ConvergenceReport& rep, const Rule& r) {
  RuleResult res{r.id, r.kind, false, kNaN, ""};
  const SweepConfig& cfg = rep.config;
  const LimitSpectrum ls = limit_spectrum(limit_operator(cfg.problem, cfg.params));
  if (ls.n < 2) {
    res.detail = "needs a two-dimensional limit";
    return res;
  }
  const double t1 = ls.eigenvalues[0];
  const double t2 = std::isfinite(r.target) ? r.target : ls.eigenvalues[1];
  std::vector<const SweepRow*> rows;
  for (const auto& row : rep.rows)
    if (row.status != "skipped" && std::isfinite(row.get("lambda2"))) rows.push_back(&row);
  std::ostringstream os;
  if (rows.size() < 3) {
    res.detail = "fewer than 3 rows with eigenvalues";
    return res;
  }
  double e1 = 0.0;
  for (const auto* row : rows) e1 = std::max(e1, std::abs(row->get("lambda1") - t1));
  const bool ok1 = e1 <= r.tol;
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(std::abs(rows[i]->get("lambda2") - t2) < std::abs(rows[i - 1]->get("lambda2") - t2)))
      monotone = false;
  const SweepRow* ref = nullptr;
  for (const auto* row : rows)
    if (std::abs(row->epsilon - r.reference_epsilon) <= 1e-12 * r.reference_epsilon) ref = row;
  double improvement = kNaN;
  if (ref)
    improvement = std::abs(ref->get("lambda2") - t2) / std::abs(rows.back()->get("lambda2") - t2);
  const bool ok2 = monotone && ref && improvement >= r.factor;
  Series s3;
  for (const auto* row : rows) {
    s3.eps.push_back(1.0 / row->epsilon);
    s3.value.push_back(row->get("lambda3"));
  }
  double exp3 = kNaN;
  if (usable_points(s3.eps, s3.value) >= 3) exp3 = fit_rate(s3.eps, s3.value).slope;
  const bool ok3 = std::isfinite(exp3) && exp3 >= r.exponent_min;
  res.pass = ok1 && ok2 && ok3;
  res.measured = improvement;
  os << "max|lambda1 - " << short_num(t1) << "| " << short_num(e1) << " (tol " << short_num(r.tol)
     << "); lambda2 -> " << short_num(t2) << (monotone ? " monotonically" : " NOT monotonically");
  if (ref)
    os << ", improvement " << short_num(improvement) << " from eps " << short_num(ref->epsilon)
       << " (min " << short_num(r.factor) << ")";
  else
    os << ", reference eps " << short_num(r.reference_epsilon) << " not in sweep";
  os << "; lambda3 exponent vs 1/eps " << short_num(exp3) << " (min " << short_num(r.exponent_min)
     << ")";
  res.detail = os.str();
  return res;
}

RuleResult check_exact_zero(const ConvergenceReport& rep, const Rule& r) {
  RuleResult res{r.id, r.kind, false, 0.0, ""};
  std::ostringstream os;
  bool pass = true;
  std::size_t rows = 0;
  std::string worst_col;
  for (const auto& row : rep.rows) {
    if (row.status == "skipped") continue;
    ++rows;
    for (const auto& c : r.columns) {
      const double v = row.get(c);
      if (!std::isfinite(v)) {
        pass = false;
        os << c << " missing at eps " << short_num(row.epsilon) << "; ";
        continue;
      }
      if (std::abs(v) > res.measured) {
        res.measured = std::abs(v);
        worst_col = c;
      }
    }
  }
  if (rows == 0) {
    res.detail = "no rows";
    return res;
  }
  pass = pass && res.measured <= r.max;
  res.pass = pass;
  os << "largest value " << short_num(res.measured);
  if (!worst_col.empty()) os << " (" << worst_col << ")";
  os << ", limit " << short_num(r.max);
  res.detail = os.str();
  return res;
}

RuleResult check_all_true(const ConvergenceReport& rep, const Rule& r) {
  RuleResult res{r.id, r.kind, false, 0.0, ""};
  std::size_t good = 0, total = 0;
  for (const auto& row : rep.rows) {
    if (row.status == "skipped") continue;
    ++total;
    if (row.get(r.column) == 1.0) ++good;
  }
  res.measured = static_cast<double>(good);
  res.pass = total > 0 && good == total;
  res.detail = std::to_string(good) + " of " + std::to_string(total) + " rows have " + r.column + " = 1";
  return res;
}

RuleResult check_max(const ConvergenceReport& rep, const Rule& r) {
  RuleResult res{r.id, r.kind, false, 0.0, ""};
  const Series s = column_series(rep.rows, r.column);
  std::size_t count = 0;
  for (double v : s.value)
    if (std::isfinite(v)) {
      res.measured = std::max(res.measured, v);
      ++count;
    }
  res.pass = count > 0 && res.measured <= r.max;
  res.detail = "max " + r.column + " " + short_num(res.measured) + " over " + std::to_string(count) +
               " rows, limit " + short_num(r.max);
  return res;
}

}  // namespace

Series column_series(const std::vector<SweepRow>& rows, const std::string& column) {
  Series s;
  for (const auto& row : rows) {
    if (row.status == "skipped") continue;
    const double v = row.get(column);
    if (!std::isfinite(v)) continue;
    s.eps.push_back(row.epsilon);
    s.value.push_back(v);
  }
  return s;
}

void evaluate(ConvergenceReport& rep) {
  rep.fits.clear();
  for (const auto& c : fit_columns()) {
    ColumnFit cf;
    cf.column = c;
    const Series s = column_series(rep.rows, c);
    if (usable_points(s.eps, s.value) < 3) {
      cf.note = "fewer than 3 positive values";
    } else {
      cf.fit = fit_rate(s.eps, s.value);
      cf.ok = true;
      cf.note = cf.fit.note;
    }
    rep.fits.push_back(cf);
  }
  rep.rules.clear();
  for (const auto& r : rep.config.rules) {
    if (r.kind == "slope")
      rep.rules.push_back(check_slope(rep, r));
    else if (r.kind == "quotient")
      rep.rules.push_back(check_quotient(rep, r));
    else if (r.kind == "slope_match")
      rep.rules.push_back(check_slope_match(rep, r));
    else if (r.kind == "spectral")
      rep.rules.push_back(check_spectral(rep, r));
    else if (r.kind == "exact_zero")
      rep.rules.push_back(check_exact_zero(rep, r));
    else if (r.kind == "all_true")
      rep.rules.push_back(check_all_true(rep, r));
    else
      rep.rules.push_back(check_max(rep, r));
  }
}

std::string run_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "# run v1: one row per epsilon (descending); empty field = not computed; eq_dist is "
        "';'-joined per limit equilibrium\n";
  os << run_header() << "\n";
  for (const auto& r : rows) {
    os << num(r.epsilon) << "," << r.status << "," << sanitize(r.reason);
    for (double v : r.values) os << "," << num(v);
    os << ",";
    for (std::size_t k = 0; k < r.eq_dist.size(); ++k) os << (k ? ";" : "") << num(r.eq_dist[k]);
    os << "\n";
  }
  return os.str();
}

std::vector<SweepRow> parse_run_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  bool header = false, version = false;
  std::vector<SweepRow> rows;
  const std::size_t ncols = row_columns().size();
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!version) {
      if (line.rfind("# run v1:", 0) != 0) throw InvalidInput("run.csv: expected a '# run v1:' first line");
      version = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != run_header()) throw InvalidInput("run.csv: header does not match version 1 columns");
      header = true;
      continue;
    }
    const auto f = split_fields(line, ',');
    if (f.size() != ncols + 4) throw InvalidInput("run.csv: wrong field count in '" + line + "'");
    SweepRow r = empty_row(parse_num(f[0]));
    r.status = f[1];
    r.reason = f[2];
    for (std::size_t i = 0; i < ncols; ++i) r.values[i] = parse_num(f[3 + i]);
    if (!f.back().empty())
      for (const auto& s : split_fields(f.back(), ';')) r.eq_dist.push_back(parse_num(s));
    rows.push_back(std::move(r));
  }
  if (!header) throw InvalidInput("run.csv: missing header");
  return rows;
}

std::vector<SweepRow> read_run_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_csv(ss.str());
}

std::string rates_csv(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "# rates v1: least squares on (log eps, log value); slope_ci95 is the 95% half width\n";
  os << "column,slope,slope_ci95,intercept,r2,points,excluded,note\n";
  for (const auto& f : rep.fits) {
    os << f.column << ",";
    if (f.ok)
      os << num(f.fit.slope) << "," << num(f.fit.slope_ci95) << "," << num(f.fit.intercept) << ","
         << num(f.fit.r2) << "," << f.fit.used << "," << f.fit.excluded;
    else
      os << ",,,,0,0";
    os << "," << sanitize(f.note) << "\n";
  }
  return os.str();
}

std::string rules_csv(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "# rules v1: acceptance rules evaluated on this sweep\n";
  os << "id,kind,pass,measured,detail\n";
  for (const auto& r : rep.rules)
    os << r.id << "," << r.kind << "," << (r.pass ? 1 : 0) << "," << num(r.measured) << ","
       << sanitize(r.detail) << "\n";
  return os.str();
}

std::string summary_text(const ConvergenceReport& rep) {
  std::ostringstream os;
  const SweepConfig& c = rep.config;
  os << "sweep " << c.name << " (" << to_string(c.problem) << "), n_cells " << c.n_cells
     << ", seed " << c.seed << "\n\n";
  if (rep.rows.empty()) {
    os << "no rows\n";
  } else {
    os << "epsilon     status    tau_hat     rho_hat     sup|s|      Sgap        d_eps       eq_dist\n";
    for (const auto& r : rep.rows) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%-11.5g %-9s %-11s %-11s %-11s %-11s %-11s %s\n", r.epsilon,
                    r.status.c_str(), short_num(r.get("tau_hat")).c_str(),
                    short_num(r.get("rho_hat")).c_str(), short_num(r.get("manifold_sup")).c_str(),
                    short_num(r.get("map_sup_gap")).c_str(), short_num(r.get("d_eps")).c_str(),
                    short_num(r.get("eq_dist_max")).c_str());
      os << buf;
      if (!r.reason.empty()) os << "            note: " << r.reason << "\n";
    }
  }
  if (rep.shadowing.computed)
    os << "\nLpSP constant of the limit time-one map: L_hat " << short_num(rep.shadowing.L_hat)
       << " (" << rep.shadowing.trials << " trials, " << rep.shadowing.failures << " failures)\n";
  else if (!rep.shadowing.note.empty())
    os << "\nLpSP estimate not available: " << rep.shadowing.note << "\n";
  os << "\nfitted slopes (log-log against eps)\n";
  for (const auto& f : rep.fits) {
    if (!f.ok) continue;
    char buf[200];
    std::snprintf(buf, sizeof buf, "  %-14s %8.4f +- %-8.3g R2 %.4f\n", f.column.c_str(), f.fit.slope,
                  f.fit.slope_ci95, f.fit.r2);
    os << buf;
  }
  os << "\nrules\n";
  if (rep.rules.empty()) os << "  (none configured)\n";
  for (const auto& r : rep.rules)
    os << "  " << (r.pass ? "PASS " : "FAIL ") << r.id << ": " << r.detail << "\n";
  os << "\nverdict: " << (rep.all_pass() ? "all rules pass" : "some rules fail") << "\n";
  return os.str();
}

void emit_report(const ConvergenceReport& rep, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "plot", ec);
  if (ec) throw Error("cannot create report directory '" + dir.string() + "': " + ec.message());
  {
    const fs::path probe = dir / ".write_probe";
    std::ofstream out(probe);
    if (!out) throw Error("report directory '" + dir.string() + "' is not writable");
    out.close();
    fs::remove(probe, ec);
  }
  write_text(dir / "run.csv", run_csv(rep.rows));
  write_text(dir / "rates.csv", rates_csv(rep));
  write_text(dir / "rules.csv", rules_csv(rep));
  write_text(dir / "summary.txt", summary_text(rep));
  std::vector<std::string> plots = {"lambda1", "lambda2", "lambda3", "lambda4"};
  for (const auto& c : fit_columns())
    if (std::find(plots.begin(), plots.end(), c) == plots.end()) plots.push_back(c);
  for (const auto& c : plots) {
    const Series s = column_series(rep.rows, c);
    std::ostringstream os;
    os << "# plot v1: epsilon " << c << "\n";
    for (std::size_t i = 0; i < s.eps.size(); ++i) os << num(s.eps[i]) << " " << num(s.value[i]) << "\n";
    write_text(dir / "plot" / (c + ".dat"), os.str());
  }
}

ConvergenceReport load_report(const fs::path& dir) {
  ConvergenceReport rep;
  rep.config = load_config(dir / "config.json");
  rep.rows = read_run_csv(dir / "run.csv");
  const fs::path lp = dir / "lpsp_trials.csv";
  if (fs::exists(lp)) {
    std::ifstream in(lp);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("trial,", 0) == 0) continue;
      const auto f = split_fields(line, ',');
      if (f.size() != 5) throw InvalidInput("lpsp_trials.csv: wrong field count");
      ++rep.shadowing.trials;
      if (f[4] == "1")
        rep.shadowing.L_hat = std::max(rep.shadowing.L_hat, parse_num(f[3]));
      else
        ++rep.shadowing.failures;
    }
    rep.shadowing.computed = true;
  }
  evaluate(rep);
  return rep;
}

}  // namespace alab
