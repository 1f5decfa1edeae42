#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include "alab/sweep.hpp"

namespace alab {

// run.csv (version 1): epsilon, status, reason, the row_columns() values, eq_dist
// (';'-joined). Missing values are empty fields.
std::string run_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_run_csv(const std::string& text);
std::vector<SweepRow> read_run_csv(const std::filesystem::path& path);

std::string rates_csv(const ConvergenceReport& rep);
std::string rules_csv(const ConvergenceReport& rep);
std::string summary_text(const ConvergenceReport& rep);

// Writes run.csv, rates.csv, rules.csv, summary.txt and plot/<column>.dat into `dir`.
// Throws Error before writing anything if `dir` cannot be created or written.
void emit_report(const ConvergenceReport& rep, const std::filesystem::path& dir);
// Rebuilds a report from config.json and run.csv in a run directory (fits and rules recomputed).
ConvergenceReport load_report(const std::filesystem::path& dir);

// (epsilon, value) pairs of one column over rows that are not skipped.
struct Series {
  std::vector<double> eps, value;
};
Series column_series(const std::vector<SweepRow>& rows, const std::string& column);

}  // namespace alab
