#pragma once

// Subcommand bodies of the fchq tool. Each returns the process exit status:
//   0 success (possibly with warnings), 1 an asserted certificate failed,
//   2 configuration or I/O error, 3 solver non-convergence.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fchq/config.hpp"
#include "fchq/functionals.hpp"
#include "fchq/ground_state.hpp"
#include "fchq/inequality_lab.hpp"
#include "fchq/io.hpp"
#include "fchq/verify.hpp"

namespace fchq::cli {

enum Exit { kOk = 0, kCertificateFailed = 1, kConfigError = 2, kNotConverged = 3 };

inline constexpr double kPohozaevCertificate = 1e-8;
inline constexpr double kPositivityTolerance = 1e-8;
inline constexpr double kAsymmetryCertificate = 1e-6;
inline constexpr double kRieszEdgeCertificate = 0.05;
inline constexpr double kDecaySlopeTolerance = 0.3;
inline constexpr double kDecayRSquared = 0.99;
inline constexpr double kDecayEnvelopeRatio = 10.0;

namespace fs = std::filesystem;

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw SnapshotError("cannot create " + p.string() + ": " + ec.message());
}

// --------------------------------------------------------------------------
// solve

struct SolveOutcome {
  std::optional<SolveResult> pohozaev;
  std::optional<SolveResult> fixedpoint;

  // the Pohozaev minimizer is the primary field whenever it was computed
  const SolveResult& primary() const { return pohozaev ? *pohozaev : *fixedpoint; }
  bool any_converged() const { return (pohozaev && pohozaev->converged) || (fixedpoint && fixedpoint->converged); }
};

inline SolveOutcome run_solvers(const RunConfig& c, const GridSpec& g) {
  const FracParams p = c.params();
  const ChoquardSystem sys(g, p, c.model.build());
  const Field seed = find_seed(sys);
  SolveOutcome out;
  if (c.solver != SolverChoice::FixedPoint) out.pohozaev = minimize_pohozaev(sys, seed, c.solve);
  if (c.solver != SolverChoice::Pohozaev) out.fixedpoint = fixed_point_resolvent(sys, seed, c.solve);
  return out;
}

inline void write_result(const fs::path& dir, const std::string& stem, const SolveResult& r) {
  write_json((dir / (stem + ".json")).string(), to_json(r));
  write_snapshot((dir / (stem + ".fchq")).string(), r.u);
}

inline int cmd_solve(const RunConfig& c, std::ostream& log = std::cout) {
  for (const auto& w : c.validate()) log << "warning: " << w << "\n";
  const SolveOutcome out = run_solvers(c, c.grid());
  const fs::path dir(c.out_dir);
  ensure_dir(dir);
  if (out.pohozaev) write_result(dir, "pohozaev", *out.pohozaev);
  if (out.fixedpoint) write_result(dir, "fixedpoint", *out.fixedpoint);
  const SolveResult& prim = out.primary();
  write_json((dir / "result.json").string(), to_json(prim));
  write_snapshot((dir / "solution.fchq").string(), prim.u);
  write_text((dir / "radial_profile.csv").string(), radial_profile_csv(prim.u));

  for (const auto* r : {out.pohozaev ? &*out.pohozaev : nullptr, out.fixedpoint ? &*out.fixedpoint : nullptr}) {
    if (!r) continue;
    log << r->solver << ": " << to_string(r->status) << " after " << r->iterations
        << " iterations, J = " << format_double(r->report.energy) << "\n";
    for (const auto& w : r->warnings) log << "  warning: " << w << "\n";
  }
  return out.any_converged() ? kOk : kNotConverged;
}

// --------------------------------------------------------------------------
// verify

struct Certificate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool asserted = true;
  bool pass = false;
  std::string note;
};

inline Json to_json(const Certificate& c) {
  Json j;
  j["value"] = detail::number(c.value);
  j["threshold"] = detail::number(c.threshold);
  j["asserted"] = c.asserted;
  j["pass"] = c.pass;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

struct VerificationReport {
  std::vector<Certificate> certificates;
  Json details;

  bool passed() const {
    return std::all_of(certificates.begin(), certificates.end(), [](const auto& c) { return !c.asserted || c.pass; });
  }
  Json json() const {
    Json j;
    for (const auto& c : certificates) j[c.name] = to_json(c);
    j["details"] = details;
    j["passed"] = passed();
    return j;
  }
};

inline VerificationReport verify_field(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  VerificationReport rep;
  Certificate poh{"pohozaev_residual", 0.0, kPohozaevCertificate};
  try {
    poh.value = pohozaev_residual(u, m, p);
    poh.pass = poh.value <= poh.threshold;
  } catch (const DomainError& e) {
    poh.value = NAN;
    poh.note = e.what();
  }
  rep.certificates.push_back(poh);

  const auto q = qualitative_report(u, m, p);
  rep.details["qualitative"] = to_json(q);
  const bool trivial = q.sup_norm == 0.0;
  auto add = [&](std::string name, double value, double threshold, bool pass, std::string note = {}) {
    rep.certificates.push_back({std::move(name), value, threshold, true, pass && !trivial, std::move(note)});
  };
  add("positivity", q.min_value, -kPositivityTolerance * q.sup_norm, q.min_value > -kPositivityTolerance * q.sup_norm);
  add("asymmetry", q.asymmetry, kAsymmetryCertificate, q.asymmetry < kAsymmetryCertificate,
      q.centered ? "" : "not centered");
  add("bounded", q.sup_norm, INFINITY, std::isfinite(q.sup_norm) && std::isfinite(q.l1_norm));
  add("riesz_edge", q.riesz_edge, kRieszEdgeCertificate, q.riesz_edge < kRieszEdgeCertificate);

  if (!trivial) {
    const ChoquardSystem sys(u.grid(), p, m);
    const auto ev = sys.evaluate(u);
    Certificate eq{"equation_residual", ev.report.grad_norm / std::sqrt(ev.report.mass), NAN, false, true,
                   "||J'(u)||/||u||, reported"};
    rep.certificates.push_back(eq);
    rep.details["energy"] = to_json(ev.report);
    try {
      rep.details["decay"] = to_json(decay_fit(u, p, std::nullopt, &m));
    } catch (const Error& e) {
      rep.details["decay"] = {{"error", e.what()}};
    }
  }
  return rep;
}

inline int cmd_verify(const std::string& snapshot, const RunConfig& c, std::ostream& log = std::cout) {
  const Field u = read_snapshot(snapshot);
  c.validate();
  if (u.grid().dim != c.dim)
    throw ConfigError("snapshot dimension " + std::to_string(u.grid().dim) + " does not match config dimension " +
                      std::to_string(c.dim));
  const auto rep = verify_field(u, c.model.build(), c.params());
  const fs::path dir(c.out_dir);
  ensure_dir(dir);
  write_json((dir / "verification.json").string(), rep.json());
  for (const auto& cert : rep.certificates)
    log << (cert.asserted ? (cert.pass ? "PASS " : "FAIL ") : "INFO ") << cert.name << " = " << format_double(cert.value)
        << (cert.note.empty() ? "" : " (" + cert.note + ")") << "\n";
  return rep.passed() ? kOk : kCertificateFailed;
}

// --------------------------------------------------------------------------
// sweep

struct SweepPoint {
  double value = 0.0;
  std::string status;
  bool converged = false;
  double p_mu = NAN;
  double decay_slope = NAN;
  double pohozaev_residual = NAN;
  double equation_residual = NAN;
  std::string error;
};

inline RunConfig with_axis(RunConfig c, const std::string& axis, double v) {
  if (axis == "mu")
    c.mu = v;
  else if (axis == "s")
    c.s = v;
  else if (axis == "alpha")
    c.alpha = v;
  else if (axis == "r")
    c.model.r = v;
  else
    throw ConfigError("sweep axis must be one of mu, s, alpha, r; got '" + axis + "'");
  return c;
}

inline std::size_t worker_count(std::size_t tasks) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FCHQ_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError(std::string("FCHQ_THREADS='") + env + "' is not a positive integer");
    }
  }
  return std::max<std::size_t>(1, std::min(n, tasks));
}

inline std::string sweep_csv(const std::string& axis, const std::vector<SweepPoint>& pts) {
  std::string out = axis + ",status,converged,p_mu_estimate,decay_slope,pohozaev_residual,equation_residual,error\n";
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  for (const auto& p : pts) {
    std::string err = p.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += format_double(p.value) + "," + p.status + "," + (p.converged ? "true" : "false") + "," + num(p.p_mu) + "," +
           num(p.decay_slope) + "," + num(p.pohozaev_residual) + "," + num(p.equation_residual) + "," + err + "\n";
  }
  return out;
}

inline int cmd_sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                     std::ostream& log = std::cout) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  // every swept configuration is checked before any work starts
  std::vector<RunConfig> cfgs;
  for (double v : values) {
    cfgs.push_back(with_axis(base, axis, v));
    cfgs.back().validate();
  }
  const fs::path dir(base.out_dir);
  ensure_dir(dir);

  std::vector<SweepPoint> pts(values.size());
  std::vector<std::optional<SolveResult>> results(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepPoint& pt = pts[i];
      pt.value = values[i];
      try {
        const RunConfig& c = cfgs[i];
        const SolveOutcome out = run_solvers(c, c.grid());
        const SolveResult& r = out.primary();
        pt.status = to_string(r.status);
        pt.converged = out.any_converged();
        pt.p_mu = r.p_mu_estimate;
        const FracParams p = c.params();
        const auto model = c.model.build();
        pt.equation_residual = r.report.grad_norm / std::sqrt(r.report.mass);
        pt.pohozaev_residual = pohozaev_residual(r.u, model, p);
        try {
          pt.decay_slope = decay_fit(r.u, p, std::nullopt, &model).slope;
        } catch (const Error& e) {
          pt.error = e.what();
        }
        results[i] = r;
      } catch (const Error& e) {
        pt.status = "error";
        pt.error = e.what();
      }
    }
  };
  const std::size_t workers = worker_count(values.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // single writer, in input order
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!results[i]) continue;
    const fs::path sub = dir / (axis + "_" + std::to_string(i));
    ensure_dir(sub);
    write_json((sub / "result.json").string(), to_json(*results[i]));
    write_snapshot((sub / "solution.fchq").string(), results[i]->u);
    write_text((sub / "radial_profile.csv").string(), radial_profile_csv(results[i]->u));
  }
  write_text((dir / "sweep_summary.csv").string(), sweep_csv(axis, pts));
  bool any = false;
  for (const auto& p : pts) {
    log << axis << " = " << format_double(p.value) << ": " << p.status;
    if (std::isfinite(p.p_mu)) log << ", p_mu = " << format_double(p.p_mu);
    if (std::isfinite(p.decay_slope)) log << ", decay slope = " << format_double(p.decay_slope);
    if (!p.error.empty()) log << " [" << p.error << "]";
    log << "\n";
    any = any || p.converged;
  }
  return any ? kOk : kNotConverged;
}

// --------------------------------------------------------------------------
// ineq

inline int cmd_ineq(const RunConfig& c, std::ostream& log = std::cout) {
  c.validate();
  const FracParams p = c.params();
  ScalarBatteryOptions so;
  so.trials = c.ineq_trials;
  so.seed = c.seed;
  std::vector<IneqReport> reports = scalar_battery(so);
  for (auto& r : composition_battery(p, 100, c.seed)) reports.push_back(std::move(r));
  SweepOptions sw;
  sw.dim = p.dim;
  sw.seed = c.seed;
  reports.push_back(hls_sweep(p, sw));
  reports.push_back(sobolev_sweep(p, sw));

  const fs::path dir = fs::path(c.out_dir) / "ineq";
  ensure_dir(dir);
  bool ok = true;
  for (const auto& r : reports) {
    write_json((dir / (r.name + ".json")).string(), to_json(r));
    log << (r.violations == 0 ? "PASS " : "FAIL ") << r.name << ": " << r.trials << " trials, " << r.violations
        << " violations, worst margin " << format_double(r.worst_margin) << "\n";
    ok = ok && r.violations == 0;
  }
  return ok ? kOk : kCertificateFailed;
}

// --------------------------------------------------------------------------
// decay

inline int cmd_decay(const RunConfig& base, std::ostream& log = std::cout) {
  RunConfig c = base;
  c.half_length = base.decay_half_length;
  c.points = base.decay_points;
  for (const auto& w : c.validate()) log << "warning: " << w << "\n";
  const SolveOutcome out = run_solvers(c, c.grid());
  const SolveResult& r = out.primary();
  const auto model = c.model.build();
  std::optional<DecayWindow> window;
  if (c.decay_r1 > 0.0 || c.decay_r2 > 0.0) {
    DecayWindow w = default_decay_window(r.u);
    if (c.decay_r1 > 0.0) w.r1 = c.decay_r1;
    if (c.decay_r2 > 0.0) w.r2 = c.decay_r2;
    window = w;
  }
  const fs::path dir(c.out_dir);
  ensure_dir(dir);
  write_result(dir, "decay_solution", r);
  write_text((dir / "decay_profile.csv").string(), radial_profile_csv(r.u));
  DecayFit fit;
  try {
    fit = decay_fit(r.u, c.params(), window, &model);
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  write_json((dir / "decay.json").string(), to_json(fit));
  log << "slope " << format_double(fit.slope) << " (expected " << format_double(fit.expected) << "), r^2 "
      << format_double(fit.r_squared) << ", envelope ratio " << format_double(fit.envelope_ratio()) << "\n";
  for (const auto& f : fit.flags) log << "  " << f << "\n";
  if (!out.any_converged()) return kNotConverged;
  if (fit.informational) return kOk;
  const bool pass = std::abs(fit.slope - fit.expected) <= kDecaySlopeTolerance && fit.r_squared >= kDecayRSquared &&
                    fit.envelope_ratio() < kDecayEnvelopeRatio;
  return pass ? kOk : kCertificateFailed;
}

}  // namespace fchq::cli
