#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "alab/config.hpp"
#include "alab/error.hpp"
#include "alab/fit.hpp"
#include "alab/report.hpp"
#include "alab/sweep.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kRulesFailed = 2;

int verdict(const alab::ConvergenceReport& rep) { return rep.all_pass() ? kPass : kRulesFailed; }

int cmd_run(const std::string& config_path, bool fresh, bool quiet) {
  const alab::SweepConfig cfg = alab::load_config(config_path);
  const fs::path dir = alab::resolve_output_dir(cfg);
  alab::SweepOptions opt;
  opt.resume = !fresh;
  opt.log = quiet ? nullptr : &std::cerr;
  if (!quiet) std::cerr << "run " << cfg.name << " -> " << dir.string() << std::endl;
  const alab::ConvergenceReport rep = alab::run_sweep(cfg, dir, opt);
  alab::emit_report(rep, dir);
  std::cout << alab::summary_text(rep);
  return verdict(rep);
}

int cmd_fit(const std::string& csv, const std::string& column) {
  const auto rows = alab::read_run_csv(csv);
  const alab::Series s = alab::column_series(rows, column);
  const alab::RateFit f = alab::fit_rate(s.eps, s.value);
  std::printf("column %s: slope %.6g +- %.3g (95%%), intercept %.6g, R2 %.6f, points %zu",
              column.c_str(), f.slope, f.slope_ci95, f.intercept, f.r2, f.used);
  if (!f.note.empty()) std::printf(" (%s)", f.note.c_str());
  std::printf("\n");
  return kPass;
}

int cmd_report(const std::string& dir) {
  const alab::ConvergenceReport rep = alab::load_report(dir);
  alab::emit_report(rep, dir);
  std::cout << alab::summary_text(rep);
  return verdict(rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence-rate laboratory for singularly perturbed parabolic attractors"};
  app.require_subcommand(1);
  app.footer(std::string("Exit codes: 0 all rules pass, 2 rules failed, 1 error. ") +
             alab::kOutputRootEnv + " overrides the root of relative output directories.");

  std::string config_path;
  bool fresh = false, quiet = false;
  auto* run = app.add_subcommand("run", "Run an epsilon sweep from a JSON config");
  run->add_option("config", config_path, "Sweep config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_flag("--fresh", fresh, "Ignore persisted per-epsilon results");
  run->add_flag("--quiet", quiet, "No progress lines on stderr");

  std::string csv, column;
  auto* fit = app.add_subcommand("fit", "Fit a log-log rate to one run.csv column");
  fit->add_option("csv", csv, "run.csv file")->required()->check(CLI::ExistingFile);
  fit->add_option("--column", column, "Column name")->required();

  std::string dir;
  auto* report = app.add_subcommand("report", "Rebuild report files from a run directory");
  report->add_option("dir", dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kError;
  }
  try {
    if (*run) return cmd_run(config_path, fresh, quiet);
    if (*fit) return cmd_fit(csv, column);
    if (*report) return cmd_report(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kError;
  }
  return kError;
}
