#pragma once

// Ground-state computation.
//
// minimize_pohozaev: descent for J_mu restricted to the Pohozaev set. Each
// step moves along the (optionally resolvent-preconditioned) gradient and is
// retracted back onto {P_mu = 0} by the dilation u -> u(./t*). Steps are
// accepted only if J does not increase; J increments are evaluated from the
// difference field so that the comparison stays meaningful when the change
// is far below the rounding floor of J itself.
//
// fixed_point_resolvent: damped Picard iteration on
//   u = ((-Delta)^s + mu)^{-1} [(I_alpha * F(u)) f(u)],
// with a Petviashvili amplitude factor that neutralises the unstable
// amplitude direction of the plain iteration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/fft.hpp"
#include "fchq/functionals.hpp"
#include "fchq/grid.hpp"
#include "fchq/nonlinearity.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq {

struct SolveOptions {
  int max_iters = 3000;
  double step_size = 1.0;
  double grad_tol = 1e-8;       // on ||J'(u)||_2 / ||u||_2
  double pohozaev_tol = 1e-8;   // on |P| / (kinetic + mu mass)
  double backtracking = 0.5;
  bool preconditioned = true;
  // Polak-Ribiere mixing of the previous direction (reset to steepest
  // descent whenever it stops being a descent direction).
  bool conjugate = true;
  double max_step = 2.0;
  double min_step = 1e-12;
  DilateOptions dilation{};

  void validate() const {
    if (!(grad_tol > 0.0 && pohozaev_tol > 0.0)) throw InvalidParams("tolerances must be positive");
    if (!(step_size > 0.0)) throw InvalidParams("step_size must be positive");
    if (!(backtracking > 0.0 && backtracking < 1.0)) throw InvalidParams("backtracking factor must lie in (0,1)");
    if (max_iters < 0) throw InvalidParams("max_iters must be nonnegative");
  }
};

enum class SolveStatus { Converged, MaxIters, LineSearchStall, Stagnation, ConstrainedStationary };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIters:
      return "MaxIters";
    case SolveStatus::LineSearchStall:
      return "LineSearchStall";
    case SolveStatus::Stagnation:
      return "Stagnation";
    case SolveStatus::ConstrainedStationary:
      return "ConstrainedStationary";
  }
  return "?";
}

struct HistoryEntry {
  double energy = 0.0;
  double grad_norm = 0.0;
  double pohozaev = 0.0;
};

struct SolveResult {
  Field u;
  EnergyReport report;
  int iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<HistoryEntry> history;
  double p_mu_estimate = 0.0;
  // ||J' - lambda P'|| / ||u|| for the best lambda; Pohozaev descent only.
  double lagrange_residual = 0.0;
  Warnings warnings;
  std::string solver;
};

// --------------------------------------------------------------------------
// Seeds

/// Smooth compactly supported radial bump amp * exp(1 - 1/(1 - |x/rho|^2)).
inline Field radial_bump(const GridSpec& g, double amplitude, double rho) {
  return Field::sample(g, [&](const std::array<double, 3>& x) {
    const double q = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (rho * rho);
    return q < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
  });
}

inline Field find_seed(const ChoquardSystem& sys) {
  const auto t0 = positive_point(sys.model());
  if (!t0)
    throw SeedFailure("F(t) <= 0 at every probed t > 0 for " + sys.model().describe() +
                      "; no positive seed amplitude (D values tried: none)");
  const double L = sys.grid().half_length;
  std::string tried;
  for (double rho = L / 4.0; rho <= L / 1.5 + 1e-12; rho *= 1.5) {
    Field v = radial_bump(sys.grid(), *t0, rho);
    const double d = sys.dterm(v);
    if (d > 0.0) return v;
    tried += " rho=" + num_str(rho) + ":D=" + num_str(d);
  }
  throw SeedFailure("no probed radius gives D > 0;" + tried);
}

inline Field find_seed(const NonlinearityModel& m, const FracParams& p, const GridSpec& g) {
  return find_seed(ChoquardSystem(g, p, m));
}

// --------------------------------------------------------------------------
// Pohozaev descent

namespace detail {

inline double relative_pohozaev(const FracParams& p, const EnergyReport& r) {
  const double scale = r.kinetic + p.mu * r.mass;
  return scale > 0.0 ? std::abs(r.pohozaev) / scale : 0.0;
}

// Scale amplitude so that P(lambda u) = 0; used once on the seed, where the
// dilation needed to reach the Pohozaev set can be far outside [1/4, 4].
inline Field amplitude_projection(const ChoquardSystem& sys, const Field& u) {
  const FracParams& p = sys.params();
  const double lin = 0.5 * (p.dim - 2.0 * p.s) * sys.kinetic(u) + 0.5 * p.dim * p.mu * sys.mass(u);
  auto q = [&](double loglam) {
    const double lam = std::exp(loglam);
    return lin - 0.5 * (p.dim + p.alpha) * sys.dterm(scale(lam, u)) / (lam * lam);
  };
  double lo = 0.0, hi = 0.0;
  int guard = 0;
  while (q(hi) > 0.0) {
    hi += 1.0;
    if (++guard > 60) throw NoPohozaevTime("no amplitude reaches the Pohozaev set");
  }
  while (q(lo) <= 0.0) {
    lo -= 1.0;
    if (++guard > 120) throw NoPohozaevTime("no amplitude reaches the Pohozaev set");
  }
  for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) > 0.0 ? lo : hi) = mid;
  }
  return scale(std::exp(0.5 * (lo + hi)), u);
}

struct Projected {
  Evaluation ev;
  double t_total = 1.0;
};

// Retraction onto {P = 0}: dilate by t* computed from (A, B, D) through the
// scaling laws, re-evaluate, repeat while the interpolation error leaves a
// residual above 1e-12.
inline Projected project(const ChoquardSystem& sys, Field z, const DilateOptions& dopts) {
  Projected out{sys.evaluate(z), 1.0};
  for (int round = 0; round < 6; ++round) {
    if (relative_pohozaev(sys.params(), out.ev.report) <= 1e-12) break;
    const auto& r = out.ev.report;
    const double t = pohozaev_time(sys.params(), r.kinetic, r.mass, r.dterm);
    if (std::abs(t - 1.0) < 1e-15) break;
    z = dilate(out.ev.u, t, dopts);
    out.t_total *= t;
    out.ev = sys.evaluate(z);
  }
  return out;
}

// J(v) - J(u) evaluated from w = v - u so that its rounding error is relative
// to the increment rather than to J.
inline double energy_increment(const ChoquardSystem& sys, const Evaluation& a, const Evaluation& b) {
  const FracParams& p = sys.params();
  const double direct = b.report.energy - a.report.energy;
  const double floor = 1e-11 * (std::abs(a.report.kinetic) + p.mu * a.report.mass + std::abs(a.report.dterm));
  if (std::abs(direct) > floor) return direct;
  const Field w = combine(1.0, b.u, -1.0, a.u);
  const Field sum = combine(1.0, b.u, 1.0, a.u);
  const double d_kin = inner(sys.frac_lap(w), sum);
  const double d_mass = inner(w, sum);
  std::vector<double> dF(w.size());
  for (std::size_t i = 0; i < dF.size(); ++i) dF[i] = eval_F_increment(sys.model(), a.u[i], w[i]);
  const Field dFf(sys.grid(), std::move(dF));
  const Field Fsum = combine(1.0, a.F, 1.0, b.F);
  const double d_dterm = inner(sys.riesz().apply(dFf), Fsum);
  return 0.5 * d_kin + 0.5 * p.mu * d_mass - 0.5 * d_dterm;
}

// P'(u) = (N-2s)(-Delta)^s u + N mu u - (N+alpha)(I_alpha * F(u)) f(u)
inline Field pohozaev_gradient(const ChoquardSystem& sys, const Evaluation& ev) {
  const FracParams& p = sys.params();
  std::vector<double> v(ev.u.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = (p.dim - 2.0 * p.s) * ev.frac_lap[i] + p.dim * p.mu * ev.u[i] -
           (p.dim + p.alpha) * ev.potential[i] * eval_f(sys.model(), ev.u[i]);
  return Field(sys.grid(), std::move(v));
}

inline double lagrange_residual(const Field& grad, const Field& q) {
  const double qq = inner(q, q);
  if (!(qq > 0.0)) return l2_norm(grad);
  return l2_norm(combine(1.0, grad, -inner(q, grad) / qq, q));
}

inline bool converged(const SolveOptions& o, const FracParams& p, const EnergyReport& r) {
  const double norm = std::sqrt(r.mass);
  return norm > 0.0 && r.grad_norm <= o.grad_tol * norm && relative_pohozaev(p, r) <= o.pohozaev_tol;
}

inline void finish(const ChoquardSystem& sys, SolveResult& res, const Evaluation& ev) {
  res.u = ev.u;
  res.report = ev.report;
  res.p_mu_estimate = ev.report.energy;
  const double edge = boundary_ratio(ev.u);
  if (edge > kDefaultContaminationThreshold)
    res.warnings.push_back("BoundaryContamination: the outer 10% shell holds " + num_str(edge) +
                           " of the peak (threshold " + num_str(kDefaultContaminationThreshold) + ")");
  (void)sys;
}

}  // namespace detail

inline SolveResult minimize_pohozaev(const ChoquardSystem& sys, const Field& seed, const SolveOptions& opts = {}) {
  opts.validate();
  const FracParams& p = sys.params();
  if (!(sys.dterm(seed) > 0.0)) throw NoPohozaevTime("seed has D <= 0");

  SolveResult res;
  res.solver = "pohozaev";
  auto proj = detail::project(sys, detail::amplitude_projection(sys, seed), opts.dilation);
  Evaluation ev = std::move(proj.ev);
  double energy = ev.report.energy;
  res.history.push_back({energy, ev.report.grad_norm, ev.report.pohozaev});

  double step = opts.step_size;
  Field prev_dir, prev_z, step_taken_dir;
  double prev_rz = 0.0;
  res.status = SolveStatus::MaxIters;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (detail::converged(opts, p, ev.report)) {
      res.status = SolveStatus::Converged;
      break;
    }
    // Tangential direction: remove the component that changes P to first order.
    const Field q = detail::pohozaev_gradient(sys, ev);
    const Field rg = opts.preconditioned ? sys.resolvent(ev.gradient) : ev.gradient;
    const Field rq = opts.preconditioned ? sys.resolvent(q) : q;
    const double qq = inner(q, rq);
    const double c = qq > 0.0 ? inner(q, rg) / qq : 0.0;
    const Field z = combine(1.0, rg, -c, rq);
    const Field r = combine(1.0, ev.gradient, -c, q);
    const double rz = inner(r, z);
    Field dir = z;
    if (opts.conjugate && !prev_dir.empty() && prev_rz > 0.0) {
      const double beta = std::max(0.0, (rz - inner(r, prev_z)) / prev_rz);
      Field d = combine(1.0, z, beta, prev_dir);
      if (qq > 0.0) d = combine(1.0, d, -inner(q, d) / qq, rq);
      if (inner(ev.gradient, d) > 0.0) dir = std::move(d);
    }
    res.lagrange_residual = detail::lagrange_residual(ev.gradient, q) / std::sqrt(ev.report.mass);
    if (res.lagrange_residual <= opts.grad_tol) {
      res.status = SolveStatus::ConstrainedStationary;
      break;
    }
    const double slope = inner(ev.gradient, dir);
    bool accepted = false;
    while (step >= opts.min_step) {
      try {
        auto cand = detail::project(sys, combine(1.0, ev.u, -step, dir), opts.dilation);
        step_taken_dir = dir;
        const double dj = detail::energy_increment(sys, ev, cand.ev);
        if (dj <= -1e-4 * step * slope || (dj <= 0.0 && step * slope < 1e-13 * std::abs(energy))) {
          ev = std::move(cand.ev);
          energy += dj;
          accepted = true;
          break;
        }
      } catch (const DilationRange&) {
      } catch (const BoundaryContamination&) {
      } catch (const NoPohozaevTime&) {
      }
      step *= opts.backtracking;
    }
    if (!accepted) {
      if (!prev_dir.empty()) {
        // retry once from steepest descent before giving up
        prev_dir = Field();
        step = opts.step_size;
        continue;
      }
      res.status = SolveStatus::LineSearchStall;
      break;
    }
    res.history.push_back({energy, ev.report.grad_norm, ev.report.pohozaev});
    prev_dir = step_taken_dir;
    prev_z = z;
    prev_rz = rz;
    step = std::min(step / opts.backtracking, opts.max_step);
  }
  if (res.status == SolveStatus::MaxIters && detail::converged(opts, p, ev.report)) res.status = SolveStatus::Converged;
  if (res.status == SolveStatus::ConstrainedStationary)
    res.warnings.push_back("ConstrainedStationary: J' is parallel to P' (relative Lagrange residual " +
                           num_str(res.lagrange_residual) + ") but ||J'||/||u|| = " +
                           num_str(ev.report.grad_norm / std::sqrt(ev.report.mass)) +
                           "; the discrete Pohozaev minimum is not a discrete critical point on this box");
  res.iterations = it;
  res.converged = res.status == SolveStatus::Converged;
  detail::finish(sys, res, ev);
  return res;
}

inline SolveResult minimize_pohozaev(const Field& seed, const NonlinearityModel& m, const FracParams& p,
                                     const SolveOptions& opts = {}) {
  return minimize_pohozaev(ChoquardSystem(seed.grid(), p, m), seed, opts);
}

// --------------------------------------------------------------------------
// Resolvent fixed point

inline constexpr double kFixedPointNonmonotone = 10.0;

inline SolveResult fixed_point_resolvent(const ChoquardSystem& sys, const Field& seed, const SolveOptions& opts = {}) {
  opts.validate();
  const FracParams& p = sys.params();
  SolveResult res;
  res.solver = "fixedpoint";
  const double seed_norm = l2_norm(seed);

  auto residual_of = [](const Evaluation& e) {
    const double n = std::sqrt(e.report.mass);
    return n > 0.0 ? e.report.grad_norm / n : 0.0;
  };

  Evaluation ev = sys.evaluate(seed);
  if (seed_norm == 0.0) {
    res.status = SolveStatus::Converged;
    res.warnings.push_back("trivial limit: iteration sits at u = 0");
    res.history.push_back({0.0, 0.0, 0.0});
    res.converged = true;
    detail::finish(sys, res, ev);
    return res;
  }
  double resid = residual_of(ev);
  res.history.push_back({ev.report.energy, ev.report.grad_norm, ev.report.pohozaev});

  double theta = std::min(1.0, opts.step_size);
  double best = resid;
  int since_best = 0;
  res.status = SolveStatus::MaxIters;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (resid <= opts.grad_tol) {
      res.status = SolveStatus::Converged;
      break;
    }
    std::vector<double> nv(ev.u.size());
    for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = ev.potential[i] * eval_f(sys.model(), ev.u[i]);
    const Field nonlin(sys.grid(), std::move(nv));
    const double lin_pair = ev.report.kinetic + p.mu * ev.report.mass;
    const double nonlin_pair = inner(nonlin, ev.u);
    double factor = 1.0;
    if (nonlin_pair > 0.0 && ev.report.dterm > 0.0) {
      const double degree = std::clamp(2.0 * nonlin_pair / ev.report.dterm - 1.0, 1.1, 50.0);
      factor = std::pow(lin_pair / nonlin_pair, degree / (degree - 1.0));
    }
    const Field image = scale(factor, sys.resolvent(nonlin));

    bool accepted = false;
    while (theta >= 1e-6) {
      Evaluation cand = sys.evaluate(combine(1.0 - theta, ev.u, theta, image));
      const double r = residual_of(cand);
      if (std::sqrt(cand.report.mass) < 1e-12 * seed_norm) {
        ev = std::move(cand);
        resid = 0.0;
        res.warnings.push_back("trivial limit: iteration collapsed to u = 0");
        accepted = true;
        break;
      }
      // nonmonotone: far from a solution the residual may rise for a while
      // before the amplitude settles; the stagnation guard bounds this
      if (r <= resid || r <= kFixedPointNonmonotone * best) {
        ev = std::move(cand);
        resid = r;
        accepted = true;
        theta = std::min(1.0, 2.0 * theta);
        break;
      }
      theta *= 0.5;
    }
    if (!accepted) {
      res.status = SolveStatus::Stagnation;
      break;
    }
    res.history.push_back({ev.report.energy, ev.report.grad_norm, ev.report.pohozaev});
    if (resid < 0.99 * best) {
      best = resid;
      since_best = 0;
    } else if (++since_best > 200) {
      res.status = SolveStatus::Stagnation;
      break;
    }
  }
  if (res.status == SolveStatus::MaxIters && resid <= opts.grad_tol) res.status = SolveStatus::Converged;
  res.iterations = it;
  res.converged = res.status == SolveStatus::Converged;
  detail::finish(sys, res, ev);
  return res;
}

inline SolveResult fixed_point_resolvent(const Field& seed, const NonlinearityModel& m, const FracParams& p,
                                         const SolveOptions& opts = {}) {
  return fixed_point_resolvent(ChoquardSystem(seed.grid(), p, m), seed, opts);
}

// --------------------------------------------------------------------------
// Mountain-pass paths

/// {0, u(./t_1), ..., u(./t_k)} for the given dilation factors.
inline std::vector<Field> dilation_path(const Field& u, std::span<const double> ts, const DilateOptions& opts = {}) {
  std::vector<Field> path{Field::zeros(u.grid())};
  for (double t : ts) path.push_back(dilate(u, t, opts));
  return path;
}

inline double mountain_pass_upper_bound(const ChoquardSystem& sys, std::span<const Field> path) {
  if (path.empty() || path.front().max_abs() != 0.0) throw NotAdmissible("path must start at u = 0");
  const double last = sys.energy(path.back());
  if (!(last < 0.0)) throw NotAdmissible("path endpoint has J = " + num_str(last) + " >= 0");
  double peak = -std::numeric_limits<double>::infinity();
  for (const Field& f : path) peak = std::max(peak, sys.energy(f));
  return peak;
}

inline double mountain_pass_upper_bound(std::span<const Field> path, const NonlinearityModel& m, const FracParams& p) {
  if (path.empty()) throw NotAdmissible("empty path");
  return mountain_pass_upper_bound(ChoquardSystem(path.front().grid(), p, m), path);
}

// --------------------------------------------------------------------------
// Alignment

/// Center of mass of u^2, per axis.
inline std::array<double, 3> center_of_mass(const Field& u) {
  const GridSpec& g = u.grid();
  std::array<double, 3> c{0.0, 0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = u[i] * u[i];
    const auto x = position(g, i);
    for (int d = 0; d < g.dim; ++d) c[d] += w * x[d];
    total += w;
  }
  if (total > 0.0)
    for (int d = 0; d < g.dim; ++d) c[d] /= total;
  return c;
}

/// u(x + shift) by a spectral phase ramp; the Nyquist mode is kept real.
inline Field translate(const Field& u, const std::array<double, 3>& shift) {
  const GridSpec& g = u.grid();
  auto c = detail::to_complex(u);
  fft::forward(c, g.dim, static_cast<int>(g.points_per_axis));
  const std::size_t n = g.points_per_axis;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto idx = unflatten(g, i);
    double phase = 0.0;
    bool nyquist = false;
    for (int d = 0; d < g.dim; ++d) {
      if (idx[d] == n / 2) nyquist = true;
      phase += axis_frequency(g, idx[d]) * shift[d];
    }
    c[i] *= nyquist ? fft::Complex(std::cos(phase), 0.0) : std::polar(1.0, phase);
  }
  fft::inverse(c, g.dim, static_cast<int>(n));
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c[i].real();
  return Field(g, std::move(v));
}

/// Moves the center of mass of u^2 to the grid center.
inline Field center_field(const Field& u) {
  auto c = center_of_mass(u);
  return translate(u, c);
}

}  // namespace fchq
