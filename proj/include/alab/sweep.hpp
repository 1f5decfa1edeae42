#pragma once
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "alab/config.hpp"
#include "alab/fit.hpp"

namespace alab {

// Row status: "complete" (every enabled stage ran), "partial" (spectral quantities present,
// a later stage hit a regime limit; reason says which) or "skipped" (nothing usable).
struct SweepRow {
  double epsilon = 0.0;
  std::string status = "skipped";
  std::string reason;
  // Numeric columns in the order of row_columns(); NaN means not computed.
  std::vector<double> values;
  std::vector<double> eq_dist;  // per limit equilibrium, in limit equilibrium order

  double get(const std::string& column) const;
  void set(const std::string& column, double v);
};

// Fixed numeric column names of run.csv (version 1). "eq_dist" is the multi-valued
// equilibrium distance column and is stored separately.
const std::vector<std::string>& row_columns();
SweepRow empty_row(double epsilon);

struct ColumnFit {
  std::string column;
  bool ok = false;
  RateFit fit;
  std::string note;
};

struct RuleResult {
  std::string id;
  std::string kind;
  bool pass = false;
  double measured = 0.0;
  std::string detail;
};

struct ShadowingSummary {
  bool computed = false;
  double L_hat = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::string note;
};

struct ConvergenceReport {
  SweepConfig config;
  std::vector<SweepRow> rows;  // epsilon descending
  ShadowingSummary shadowing;
  std::vector<ColumnFit> fits;
  std::vector<RuleResult> rules;
  bool all_pass() const;
};

struct SweepOptions {
  bool resume = true;          // reuse persisted per-epsilon rows with an identical config
  std::ostream* log = nullptr;  // progress lines
};

// Runs every epsilon point, persisting artifacts under `run_dir`, then evaluates fits and rules.
// Regime failures mark a row partial or skipped; other errors propagate.
ConvergenceReport run_sweep(const SweepConfig& cfg, const std::filesystem::path& run_dir,
                            const SweepOptions& opt = {});
// Fills fits and rules from rows.
void evaluate(ConvergenceReport& rep);

}  // namespace alab
