#pragma once
#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "alab/grid.hpp"

namespace alab {

// Environment variable that replaces the root directory of relative output paths.
inline constexpr const char* kOutputRootEnv = "ALAB_OUTPUT_ROOT";

struct StageSwitches {
  bool dynamics = true;   // manifold, reduced flow, attractors, equilibria
  bool estimates = true;  // linear semigroup estimate check
  bool shadowing = true;  // LpSP estimate of the limit time-one map
};

struct Numerics {
  std::size_t modes = 0;  // eigenpairs computed; 0 picks n + tail + 64 (all on small grids)
  std::size_t spectral_probes = 16;
  std::size_t random_probes = 64;
  std::size_t power_steps = 8;
  std::size_t norm_probes = 16;   // cosine and random probes for the norm ratio
  double rho_box = 1.2;           // half width of the limit box sampled by the nonlinearity gap
  std::size_t rho_samples = 9;
  std::size_t tail = 200;         // complement modes kept by the graph transform
  std::size_t section_pts = 33;
  double delta = 0.5;             // gamma = largest limit eigenvalue + delta
  double Delta = 0.5;
  double fixed_point_tol = 1e-6;
  std::size_t max_iter = 30;
  double box_inflation = 1.5;     // section box = limit attractor bounding box scaled by this
  double eq_box = 2.0;            // half width of the equilibrium seed box
  std::size_t sup_gap_pts = 0;    // 0 picks 41 (n = 1) or 15 (n = 2)
  std::size_t estimate_samples = 24;
  std::vector<double> estimate_times{0.01, 0.03, 0.1, 0.3, 1.0, 3.0};
  std::size_t lpsp_trials = 20;
  std::size_t lpsp_segment = 200;
  double delta0 = 0.0;  // LpSP defect scale; 0 picks 1e-3 times the limit attractor diameter
  unsigned threads = 0;  // graph transform workers; 0 = hardware concurrency
  unsigned jobs = 1;     // epsilon points computed concurrently
};

// One acceptance rule evaluated on the finished sweep.
//   slope        fitted log-log slope of `column` (squared when `square`, against 1/eps when
//                `inverse`) lies in [min, max] with R^2 >= min_r2
//   quotient     max/min over rows of column / (tau_hat + rho_hat) <= max_ratio
//   slope_match  |slope(column) - slope(reference)| <= max_diff
//   spectral     lambda1 = lambda to tol, lambda2 -> target monotonically and improves by
//                `factor` between reference_epsilon and the smallest eps, lambda3 grows with
//                exponent >= exponent_min against 1/eps
//   exact_zero   every value of every listed column <= max
//   all_true     every row has column == 1
//   max          every value of column <= max
struct Rule {
  std::string id;
  std::string kind;
  std::string column;
  std::string reference = "tau_plus_rho";
  std::vector<std::string> columns;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  double min_r2 = 0.0;
  double max_ratio = 5.0;
  double max_diff = 0.15;
  bool square = false;
  bool inverse = false;
  double tol = 1e-10;
  double factor = 2.0;
  double reference_epsilon = 0.05;
  double exponent_min = 0.8;
  double target = std::numeric_limits<double>::quiet_NaN();  // NaN: limit eigenvalue
};

struct SweepConfig {
  std::string name;
  ProblemTag problem = ProblemTag::homogenization;
  ProblemParams params;
  double R_cut = 4.0;
  double cutoff_width = 1.0;
  std::vector<double> epsilons;  // strictly descending
  double epsilon_max = 1.0;
  std::size_t n_cells = 2000;
  unsigned seed = 1;
  std::string output_dir;
  StageSwitches stages;
  Numerics numerics;
  std::vector<Rule> rules;
};

// Parses and validates; unknown keys anywhere raise InvalidInput naming the key path.
SweepConfig parse_config(std::string_view json_text);
SweepConfig load_config(const std::filesystem::path& path);
// Canonical JSON with every field spelled out (stable key order).
std::string config_to_json(const SweepConfig& cfg);
// Throws InvalidInput when an invariant fails (ordering, range, grid resolution).
void validate(const SweepConfig& cfg);
// Acceptance rules that apply to a problem family by default.
std::vector<Rule> default_rules(ProblemTag problem);
// Output directory with the environment override applied.
std::filesystem::path resolve_output_dir(const SweepConfig& cfg);

}  // namespace alab
