#include "alab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "alab/error.hpp"
#include "alab/sweep.hpp"

namespace alab {

using nlohmann::json;

namespace {

// Typed, strict access to one JSON object: every key read is recorded and finish()
// rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void get(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "expected a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }
  void get(const char* key, unsigned& out) {
    std::size_t v = out;
    get(key, v);
    out = static_cast<unsigned>(v);
  }
  void get(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) fail(key, "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  void get(const char* key, std::vector<std::string>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "expected an array of strings");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_string()) fail(key, "expected an array of strings");
        out.push_back(x.get<std::string>());
      }
    }
  }
  const json* child(const char* key) { return take(key); }
  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InvalidInput("config: unknown key '" + path(it.key().c_str()) + "'");
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidInput("config: " + (path_.empty() ? std::string("top level") : path_) + ": " + msg);
  }
  [[noreturn]] void fail(const char* key, const std::string& msg) const {
    throw InvalidInput("config: " + path(key) + ": " + msg);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::set<std::string> kRuleKinds = {"slope",    "quotient",   "slope_match", "spectral",
                                          "exact_zero", "all_true", "max"};

Rule parse_rule(const json& j, const std::string& path) {
  Reader r(j, path);
  Rule rule;
  r.get("id", rule.id);
  r.get("kind", rule.kind);
  if (rule.id.empty()) throw InvalidInput("config: " + path + ": rule needs an id");
  if (!kRuleKinds.count(rule.kind))
    throw InvalidInput("config: " + path + ": unknown rule kind '" + rule.kind + "'");
  const std::string& k = rule.kind;
  if (k == "slope") {
    r.get("column", rule.column);
    r.get("min", rule.min);
    r.get("max", rule.max);
    r.get("min_r2", rule.min_r2);
    r.get("square", rule.square);
    r.get("inverse", rule.inverse);
  } else if (k == "quotient") {
    r.get("column", rule.column);
    r.get("max_ratio", rule.max_ratio);
  } else if (k == "slope_match") {
    r.get("column", rule.column);
    r.get("reference", rule.reference);
    r.get("max_diff", rule.max_diff);
  } else if (k == "spectral") {
    r.get("tol", rule.tol);
    r.get("factor", rule.factor);
    r.get("reference_epsilon", rule.reference_epsilon);
    r.get("exponent_min", rule.exponent_min);
    r.get("target", rule.target);
  } else if (k == "exact_zero") {
    r.get("columns", rule.columns);
    r.get("max", rule.max);
  } else if (k == "all_true") {
    r.get("column", rule.column);
  } else {
    r.get("column", rule.column);
    r.get("max", rule.max);
  }
  r.finish();
  return rule;
}

json rule_to_json(const Rule& r) {
  json j;
  j["id"] = r.id;
  j["kind"] = r.kind;
  const std::string& k = r.kind;
  auto finite = [&](const char* key, double v) {
    if (std::isfinite(v)) j[key] = v;
  };
  if (k == "slope") {
    j["column"] = r.column;
    finite("min", r.min);
    finite("max", r.max);
    j["min_r2"] = r.min_r2;
    j["square"] = r.square;
    j["inverse"] = r.inverse;
  } else if (k == "quotient") {
    j["column"] = r.column;
    j["max_ratio"] = r.max_ratio;
  } else if (k == "slope_match") {
    j["column"] = r.column;
    j["reference"] = r.reference;
    j["max_diff"] = r.max_diff;
  } else if (k == "spectral") {
    j["tol"] = r.tol;
    j["factor"] = r.factor;
    j["reference_epsilon"] = r.reference_epsilon;
    j["exponent_min"] = r.exponent_min;
    finite("target", r.target);
  } else if (k == "exact_zero") {
    j["columns"] = r.columns;
    finite("max", r.max);
  } else if (k == "all_true") {
    j["column"] = r.column;
  } else {
    j["column"] = r.column;
    finite("max", r.max);
  }
  return j;
}

void check_column(const std::string& name, const std::string& rule_id) {
  if (name == "eq_dist") return;
  const auto& cols = row_columns();
  if (std::find(cols.begin(), cols.end(), name) == cols.end())
    throw InvalidInput("config: rule '" + rule_id + "' names unknown column '" + name + "'");
}

}  // namespace

SweepConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: invalid JSON: ") + e.what());
  }
  SweepConfig c;
  Reader top(j, "");
  top.get("name", c.name);
  std::string problem = "homogenization";
  top.get("problem", problem);
  c.problem = parse_problem_tag(problem);
  if (const json* p = top.child("params")) {
    Reader r(*p, "params");
    ProblemParams& q = c.params;
    r.get("lambda", q.lambda);
    r.get("V0", q.V0);
    r.get("a1", q.a1);
    r.get("l1", q.l1);
    r.get("x1", q.x1);
    r.get("e_outer", q.e_outer);
    r.get("m0", q.m0);
    r.get("potential_amp", q.potential_amp);
    r.get("potential_power", q.potential_power);
    r.get("potential_offset", q.potential_offset);
    r.get("synthetic_tail", q.synthetic_tail);
    std::string base = std::string(to_string(q.synthetic_base));
    r.get("synthetic_base", base);
    q.synthetic_base = parse_problem_tag(base);
    r.get("R_cut", c.R_cut);
    r.get("cutoff_width", c.cutoff_width);
    r.finish();
  }
  top.get("epsilons", c.epsilons);
  top.get("epsilon_max", c.epsilon_max);
  top.get("n_cells", c.n_cells);
  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);
  if (const json* s = top.child("stages")) {
    Reader r(*s, "stages");
    r.get("dynamics", c.stages.dynamics);
    r.get("estimates", c.stages.estimates);
    r.get("shadowing", c.stages.shadowing);
    r.finish();
  }
  if (const json* s = top.child("numerics")) {
    Reader r(*s, "numerics");
    Numerics& n = c.numerics;
    r.get("modes", n.modes);
    r.get("spectral_probes", n.spectral_probes);
    r.get("random_probes", n.random_probes);
    r.get("power_steps", n.power_steps);
    r.get("norm_probes", n.norm_probes);
    r.get("rho_box", n.rho_box);
    r.get("rho_samples", n.rho_samples);
    r.get("tail", n.tail);
    r.get("section_pts", n.section_pts);
    r.get("delta", n.delta);
    r.get("Delta", n.Delta);
    r.get("fixed_point_tol", n.fixed_point_tol);
    r.get("max_iter", n.max_iter);
    r.get("box_inflation", n.box_inflation);
    r.get("eq_box", n.eq_box);
    r.get("sup_gap_pts", n.sup_gap_pts);
    r.get("estimate_samples", n.estimate_samples);
    r.get("estimate_times", n.estimate_times);
    r.get("lpsp_trials", n.lpsp_trials);
    r.get("lpsp_segment", n.lpsp_segment);
    r.get("delta0", n.delta0);
    r.get("threads", n.threads);
    r.get("jobs", n.jobs);
    r.finish();
  }
  if (const json* rs = top.child("rules")) {
    if (!rs->is_array()) throw InvalidInput("config: rules: expected an array");
    for (std::size_t i = 0; i < rs->size(); ++i)
      c.rules.push_back(parse_rule((*rs)[i], "rules[" + std::to_string(i) + "]"));
  } else {
    c.rules = default_rules(c.problem);
  }
  top.finish();
  validate(c);
  return c;
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const SweepConfig& c) {
  json j;
  j["name"] = c.name;
  j["problem"] = std::string(to_string(c.problem));
  const ProblemParams& q = c.params;
  j["params"] = {{"lambda", q.lambda},
                 {"V0", q.V0},
                 {"a1", q.a1},
                 {"l1", q.l1},
                 {"x1", q.x1},
                 {"e_outer", q.e_outer},
                 {"m0", q.m0},
                 {"potential_amp", q.potential_amp},
                 {"potential_power", q.potential_power},
                 {"potential_offset", q.potential_offset},
                 {"synthetic_tail", q.synthetic_tail},
                 {"synthetic_base", std::string(to_string(q.synthetic_base))},
                 {"R_cut", c.R_cut},
                 {"cutoff_width", c.cutoff_width}};
  j["epsilons"] = c.epsilons;
  j["epsilon_max"] = c.epsilon_max;
  j["n_cells"] = c.n_cells;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["stages"] = {{"dynamics", c.stages.dynamics},
                 {"estimates", c.stages.estimates},
                 {"shadowing", c.stages.shadowing}};
  const Numerics& n = c.numerics;
  j["numerics"] = {{"modes", n.modes},
                   {"spectral_probes", n.spectral_probes},
                   {"random_probes", n.random_probes},
                   {"power_steps", n.power_steps},
                   {"norm_probes", n.norm_probes},
                   {"rho_box", n.rho_box},
                   {"rho_samples", n.rho_samples},
                   {"tail", n.tail},
                   {"section_pts", n.section_pts},
                   {"delta", n.delta},
                   {"Delta", n.Delta},
                   {"fixed_point_tol", n.fixed_point_tol},
                   {"max_iter", n.max_iter},
                   {"box_inflation", n.box_inflation},
                   {"eq_box", n.eq_box},
                   {"sup_gap_pts", n.sup_gap_pts},
                   {"estimate_samples", n.estimate_samples},
                   {"estimate_times", n.estimate_times},
                   {"lpsp_trials", n.lpsp_trials},
                   {"lpsp_segment", n.lpsp_segment},
                   {"delta0", n.delta0},
                   {"threads", n.threads},
                   {"jobs", n.jobs}};
  json rules = json::array();
  for (const auto& r : c.rules) rules.push_back(rule_to_json(r));
  j["rules"] = rules;
  return j.dump(2) + "\n";
}

void validate(const SweepConfig& c) {
  if (c.epsilons.empty()) throw InvalidInput("config: epsilons must not be empty");
  if (!(c.epsilon_max > 0)) throw InvalidInput("config: epsilon_max must be positive");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    const double e = c.epsilons[i];
    if (!(e > 0 && e <= c.epsilon_max))
      throw InvalidInput("config: epsilon " + std::to_string(e) + " outside (0, epsilon_max]");
    if (i > 0 && !(e < c.epsilons[i - 1]))
      throw InvalidInput("config: epsilons must be strictly descending");
  }
  if (c.n_cells < 2) throw InvalidInput("config: n_cells must be at least 2");
  if (!(c.R_cut > 0) || !(c.cutoff_width > 0))
    throw InvalidInput("config: R_cut and cutoff_width must be positive");
  if (c.problem == ProblemTag::synthetic && c.params.synthetic_base == ProblemTag::synthetic)
    throw InvalidInput("config: synthetic_base must be homogenization or localized");
  if (c.problem == ProblemTag::localized) {
    const double cells = 2.0 * c.epsilons.back() * c.params.l1 * static_cast<double>(c.n_cells);
    if (cells < 8.0) {
      std::ostringstream os;
      os << "config: n_cells = " << c.n_cells << " puts " << cells
         << " cells in the smallest transition zone, need >= 8 (use n_cells >= "
         << static_cast<long>(std::ceil(8.0 / (2.0 * c.epsilons.back() * c.params.l1))) << ")";
      throw InvalidInput(os.str());
    }
  }
  const Numerics& n = c.numerics;
  if (n.section_pts < 2) throw InvalidInput("config: numerics.section_pts must be >= 2");
  if (n.tail == 0) throw InvalidInput("config: numerics.tail must be positive");
  if (!(n.delta > 0) || !(n.Delta > 0)) throw InvalidInput("config: delta and Delta must be positive");
  if (!(n.box_inflation >= 1)) throw InvalidInput("config: numerics.box_inflation must be >= 1");
  if (!(n.delta0 >= 0)) throw InvalidInput("config: numerics.delta0 must be nonnegative");
  if (n.jobs == 0) throw InvalidInput("config: numerics.jobs must be >= 1");
  for (double t : n.estimate_times)
    if (!(t > 0)) throw InvalidInput("config: numerics.estimate_times must be positive");
  std::set<std::string> ids;
  for (const auto& r : c.rules) {
    if (!ids.insert(r.id).second) throw InvalidInput("config: duplicate rule id '" + r.id + "'");
    if (!kRuleKinds.count(r.kind)) throw InvalidInput("config: unknown rule kind '" + r.kind + "'");
    if (r.kind == "exact_zero") {
      if (r.columns.empty()) throw InvalidInput("config: rule '" + r.id + "' lists no columns");
      for (const auto& col : r.columns) check_column(col, r.id);
    } else if (r.kind != "spectral") {
      check_column(r.column, r.id);
      if (r.kind == "slope_match") check_column(r.reference, r.id);
    }
  }
}

std::vector<Rule> default_rules(ProblemTag problem) {
  std::vector<Rule> rules;
  auto slope = [&](std::string id, std::string col, double lo, double hi) {
    Rule r;
    r.id = std::move(id);
    r.kind = "slope";
    r.column = std::move(col);
    r.min = lo;
    r.max = hi;
    rules.push_back(r);
    return &rules.back();
  };
  auto quotient = [&](std::string id, std::string col) {
    Rule r;
    r.id = std::move(id);
    r.kind = "quotient";
    r.column = std::move(col);
    rules.push_back(r);
  };
  auto match = [&](std::string id, std::string col) {
    Rule r;
    r.id = std::move(id);
    r.kind = "slope_match";
    r.column = std::move(col);
    rules.push_back(r);
  };
  switch (problem) {
    case ProblemTag::homogenization:
      slope("resolvent_rate", "tau_hat", 0.4, 0.6)->min_r2 = 0.98;
      quotient("manifold_rate", "manifold_sup");
      quotient("map_gap_constant", "map_sup_gap");
      match("map_gap_slope", "map_sup_gap");
      quotient("attractor_constant", "d_eps");
      slope("attractor_rate", "d_eps", 0.4, 0.6);
      slope("norm_ratio_growth", "norm_ratio", 0.8, 1.2)->inverse = true;
      slope("equilibrium_rate", "eq_dist", 0.4, 0.6);
      break;
    case ProblemTag::localized: {
      Rule r;
      r.id = "spectral_limit";
      r.kind = "spectral";
      rules.push_back(r);
      slope("resolvent_rate", "tau_hat", 0.4, 0.6)->square = true;
      quotient("manifold_rate", "manifold_sup");
      quotient("map_gap_constant", "map_sup_gap");
      match("map_gap_slope", "map_sup_gap");
      quotient("attractor_constant", "d_eps");
      slope("attractor_rate", "d_eps", 0.15, 0.35);
      break;
    }
    case ProblemTag::synthetic: {
      Rule r;
      r.id = "exact_zero";
      r.kind = "exact_zero";
      r.columns = {"tau_hat", "rho_hat", "proj_gap", "manifold_sup", "map_sup_gap", "d_eps"};
      r.max = 1e-8;
      rules.push_back(r);
      break;
    }
  }
  return rules;
}

std::filesystem::path resolve_output_dir(const SweepConfig& c) {
  std::filesystem::path p = c.output_dir.empty() ? std::filesystem::path("runs") / c.name
                                                 : std::filesystem::path(c.output_dir);
  if (p.empty()) p = "runs/unnamed";
  const char* root = std::getenv(kOutputRootEnv);
  if (root && *root) {
    const std::filesystem::path r(root);
    return p.is_absolute() ? r / p.filename() : r / p;
  }
  return p;
}

}  // namespace alab
