// fchq: solve, verify, sweep, ineq and decay front end.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::size_t> grid_n;
  std::optional<double> box_L;
  std::optional<std::string> solver;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI configuration file (defaults are used when omitted)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--grid-n", c.grid_n, "points per axis");
  cmd->add_option("--box-L", c.box_L, "box half-length L");
  cmd->add_option("--solver", c.solver, "pohozaev | fixedpoint | both");
}

fchq::RunConfig resolve(const Common& c) {
  fchq::RunConfig cfg = c.config.empty() ? fchq::RunConfig{} : fchq::load_config(c.config);
  if (c.out) cfg.out_dir = *c.out;
  if (c.grid_n) cfg.points = *c.grid_n;
  if (c.box_L) cfg.half_length = *c.box_L;
  if (c.solver) cfg.solver = fchq::parse_solver_choice(*c.solver);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional Choquard ground states: solver and verification workbench"};
  app.require_subcommand(1);

  Common common;
  auto* solve = app.add_subcommand("solve", "compute a ground state and write result, snapshot and radial profile");
  add_common(solve, common);

  std::string snapshot;
  auto* verify = app.add_subcommand("verify", "run the certificates on a snapshot");
  add_common(verify, common);
  verify->add_option("snapshot", snapshot, "field snapshot written by solve")->required();

  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "solve along one parameter axis");
  add_common(sweep, common);
  sweep->add_option("--axis", axis, "mu | s | alpha | r");
  sweep->add_option("--values", values, "comma separated values")->delimiter(',');

  std::optional<std::size_t> trials;
  auto* ineq = app.add_subcommand("ineq", "run the inequality battery");
  add_common(ineq, common);
  ineq->add_option("--trials", trials, "scalar trials per inequality");

  auto* decay = app.add_subcommand("decay", "solve on the decay grid and fit the tail exponent");
  add_common(decay, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fchq::cli::kConfigError;
  }

  namespace cli = fchq::cli;
  try {
    fchq::RunConfig cfg = resolve(common);
    if (*solve) return cli::cmd_solve(cfg);
    if (*verify) return cli::cmd_verify(snapshot, cfg);
    if (*sweep) {
      if (axis.empty()) axis = cfg.sweep_axis;
      if (sweep->count("--values") == 0) values = cfg.sweep_values;
      return cli::cmd_sweep(cfg, axis, values);
    }
    if (*ineq) {
      if (trials) cfg.ineq_trials = *trials;
      return cli::cmd_ineq(cfg);
    }
    if (*decay) {
      if (common.grid_n) cfg.decay_points = *common.grid_n;
      if (common.box_L) cfg.decay_half_length = *common.box_L;
      return cli::cmd_decay(cfg);
    }
  } catch (const fchq::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kConfigError;
  } catch (const fchq::SnapshotError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kConfigError;
  } catch (const fchq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kConfigError;
  }
  return cli::kConfigError;
}
