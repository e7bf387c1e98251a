#pragma once

// Run configuration: an INI file with [problem], [grid], [model], [solver],
// [output], [sweep], [decay] and [ineq] sections. Unknown keys are errors so
// that a typo never silently falls back to a default.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/ground_state.hpp"
#include "fchq/grid.hpp"
#include "fchq/nonlinearity.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq {

enum class SolverChoice { Pohozaev, FixedPoint, Both };

inline SolverChoice parse_solver_choice(const std::string& s) {
  if (s == "pohozaev") return SolverChoice::Pohozaev;
  if (s == "fixedpoint") return SolverChoice::FixedPoint;
  if (s == "both") return SolverChoice::Both;
  throw ConfigError("solver must be pohozaev, fixedpoint or both, got '" + s + "'");
}

inline const char* to_string(SolverChoice c) {
  switch (c) {
    case SolverChoice::Pohozaev:
      return "pohozaev";
    case SolverChoice::FixedPoint:
      return "fixedpoint";
    case SolverChoice::Both:
      return "both";
  }
  return "?";
}

struct ModelSpec {
  std::string kind = "pure_power";
  double r = 2.0;
  double h = 3.0;
  double coef_r = 1.0;
  double coef_h = 1.0;
  double scale = 1.0;

  NonlinearityModel build() const {
    if (kind == "pure_power") return pure_power(r);
    if (kind == "double_power") return double_power(r, h, coef_r, coef_h);
    if (kind == "saturable") return saturable(scale);
    throw UnknownModel("model kind '" + kind + "'");
  }
};

struct RunConfig {
  int dim = 2;
  double s = 0.5;
  double alpha = 1.0;
  double mu = 1.0;

  double half_length = 16.0;
  std::size_t points = 256;

  ModelSpec model;

  SolverChoice solver = SolverChoice::Both;
  SolveOptions solve;

  std::string out_dir = "out";

  std::string sweep_axis;
  std::vector<double> sweep_values;

  double decay_half_length = 32.0;
  std::size_t decay_points = 512;
  double decay_r1 = 0.0;  // 0 selects the default window
  double decay_r2 = 0.0;

  std::size_t ineq_trials = 1000000;
  std::uint64_t seed = 20240607;

  FracParams params() const { return make_frac_params(dim, s, alpha, mu); }
  GridSpec grid() const { return make_grid(dim, half_length, points); }

  /// Cross-field validation; throws ConfigError naming the violated bound.
  /// Growth-window verdicts are returned as warnings.
  std::vector<std::string> validate() const {
    std::vector<std::string> warnings;
    FracParams p;
    NonlinearityModel m;
    try {
      p = params();
      (void)grid();
      m = model.build();
      solve.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    const auto rep = check_growth(m, p);
    if (!rep.existence_hypotheses())
      warnings.push_back(m.describe() + " lies outside the noncritical window (" + num_str(rep.window_lower) +
                         ", " + num_str(rep.window_upper) + "); existence is not guaranteed");
    if (rep.f5 != Verdict::Holds) warnings.push_back("f is not O(t) near zero: decay fits are informational");
    return warnings;
  }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not an integer");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace detail

/// Applies `section.key = value` to the config.
inline void apply_setting(RunConfig& c, const std::string& section, const std::string& key, const std::string& v) {
  const std::string name = section + "." + key;
  using namespace detail;
  auto count = [&](long long lo) {
    const long long n = parse_int(name, v);
    if (n < lo) throw ConfigError(name + " must be >= " + std::to_string(lo));
    return n;
  };
  if (section == "problem") {
    if (key == "dim") return void(c.dim = static_cast<int>(parse_int(name, v)));
    if (key == "s") return void(c.s = parse_double(name, v));
    if (key == "alpha") return void(c.alpha = parse_double(name, v));
    if (key == "mu") return void(c.mu = parse_double(name, v));
  } else if (section == "grid") {
    if (key == "L") return void(c.half_length = parse_double(name, v));
    if (key == "n") return void(c.points = static_cast<std::size_t>(count(1)));
  } else if (section == "model") {
    if (key == "kind") return void(c.model.kind = v);
    if (key == "r") return void(c.model.r = parse_double(name, v));
    if (key == "h") return void(c.model.h = parse_double(name, v));
    if (key == "coef_r") return void(c.model.coef_r = parse_double(name, v));
    if (key == "coef_h") return void(c.model.coef_h = parse_double(name, v));
    if (key == "scale") return void(c.model.scale = parse_double(name, v));
  } else if (section == "solver") {
    if (key == "method") return void(c.solver = parse_solver_choice(v));
    if (key == "max_iters") return void(c.solve.max_iters = static_cast<int>(count(0)));
    if (key == "grad_tol") return void(c.solve.grad_tol = parse_double(name, v));
    if (key == "pohozaev_tol") return void(c.solve.pohozaev_tol = parse_double(name, v));
    if (key == "step_size") return void(c.solve.step_size = parse_double(name, v));
    if (key == "backtracking") return void(c.solve.backtracking = parse_double(name, v));
    if (key == "preconditioned") return void(c.solve.preconditioned = parse_bool(name, v));
    if (key == "conjugate") return void(c.solve.conjugate = parse_bool(name, v));
  } else if (section == "output") {
    if (key == "dir") return void(c.out_dir = v);
  } else if (section == "sweep") {
    if (key == "axis") return void(c.sweep_axis = v);
    if (key == "values") return void(c.sweep_values = parse_list(name, v));
  } else if (section == "decay") {
    if (key == "L") return void(c.decay_half_length = parse_double(name, v));
    if (key == "n") return void(c.decay_points = static_cast<std::size_t>(count(1)));
    if (key == "r1") return void(c.decay_r1 = parse_double(name, v));
    if (key == "r2") return void(c.decay_r2 = parse_double(name, v));
  } else if (section == "ineq") {
    if (key == "trials") return void(c.ineq_trials = static_cast<std::size_t>(count(1)));
    if (key == "seed") return void(c.seed = static_cast<std::uint64_t>(count(0)));
  }
  throw ConfigError("unknown setting " + name);
}

inline RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("setting '" + section + "' outside a section");
    for (const auto& [key, value] : body) apply_setting(c, section, key, value.get_value<std::string>());
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  return parse_config(f);
}

}  // namespace fchq
