#pragma once

// A posteriori certificates for computed solutions. Everything here is
// recomputed from the raw field; cached scalars in a SolveResult are never
// read.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/functionals.hpp"
#include "fchq/ground_state.hpp"
#include "fchq/grid.hpp"
#include "fchq/nonlinearity.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq {

// --------------------------------------------------------------------------
// Pohozaev residual

/// |P(u)| / ((N-2s)/2 kinetic + N mu/2 mass), from the free functions.
inline double pohozaev_residual(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  const double kin = gagliardo_seminorm_sq(u, p);
  const double mass = inner(u, u);
  const double d = dterm(u, m, p);
  const double denom = 0.5 * (p.dim - 2.0 * p.s) * kin + 0.5 * p.dim * p.mu * mass;
  if (!(denom > 0.0)) throw DomainError("Pohozaev residual undefined for u = 0");
  return std::abs(pohozaev_from(p, kin, mass, d)) / denom;
}

inline double pohozaev_residual(const SolveResult& res, const NonlinearityModel& m, const FracParams& p) {
  return pohozaev_residual(res.u, m, p);
}

// --------------------------------------------------------------------------
// Symmetry

namespace detail {

// Index map of a signed axis permutation; reflection j -> (n - j) mod n
// sends x_j to -x_j on the periodic grid.
inline std::size_t transformed_index(const GridSpec& g, std::size_t flat, const std::array<int, 3>& perm,
                                     const std::array<bool, 3>& flip) {
  const auto idx = unflatten(g, flat);
  const std::size_t n = g.points_per_axis;
  std::array<std::size_t, 3> out{0, 0, 0};
  for (int d = 0; d < g.dim; ++d) {
    std::size_t j = idx[perm[d]];
    if (flip[d]) j = (n - j) % n;
    out[d] = j;
  }
  return flatten(g, out);
}

}  // namespace detail

/// max over the dihedral (hyperoctahedral) group of ||u - u o R||_inf / ||u||_inf.
inline double dihedral_asymmetry(const Field& u) {
  const double sup = u.max_abs();
  if (sup == 0.0) return 0.0;
  const GridSpec& g = u.grid();
  std::array<int, 3> perm{0, 1, 2};
  double worst = 0.0;
  do {
    bool valid = true;
    for (int d = g.dim; d < 3; ++d) valid = valid && perm[d] == d;
    if (!valid) continue;
    for (int mask = 0; mask < (1 << g.dim); ++mask) {
      const std::array<bool, 3> flip{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
      for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs(u[i] - u[detail::transformed_index(g, i, perm, flip)]));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return worst / sup;
}

// --------------------------------------------------------------------------
// Qualitative certificates

struct QualitativeReport {
  double min_value = 0.0;
  double asymmetry = 0.0;
  double sup_norm = 0.0;
  double l1_norm = 0.0;
  double riesz_edge = 0.0;
  bool centered = true;
  std::vector<std::string> notes;
};

inline QualitativeReport qualitative_report(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  QualitativeReport rep;
  rep.sup_norm = u.max_abs();
  if (rep.sup_norm == 0.0) {
    rep.notes.push_back("trivial field");
    return rep;
  }
  rep.min_value = u.min_value();
  rep.asymmetry = dihedral_asymmetry(u);
  rep.l1_norm = integrate(u.map([](double v) { return std::abs(v); }));
  const Field F = u.map([&](double t) { return eval_F(m, t); });
  const Field pot = riesz_potential(F, p);
  const double peak = pot.max_abs();
  const GridSpec& g = u.grid();
  double edge = 0.0;
  for (std::size_t i = 0; i < pot.size(); ++i) {
    const auto x = position(g, i);
    bool in_shell = false;
    for (int d = 0; d < g.dim; ++d) in_shell = in_shell || std::abs(x[d]) >= 0.9 * g.half_length;
    if (in_shell) edge = std::max(edge, std::abs(pot[i]));
  }
  rep.riesz_edge = peak > 0.0 ? edge / peak : 0.0;
  const auto com = center_of_mass(u);
  for (int d = 0; d < g.dim; ++d)
    if (std::abs(com[d]) > 0.5 * g.spacing) rep.centered = false;
  if (!rep.centered) rep.notes.push_back("not centered: symmetry metric is measured about the grid center");
  return rep;
}

inline QualitativeReport qualitative_report(const SolveResult& res, const NonlinearityModel& m, const FracParams& p) {
  return qualitative_report(res.u, m, p);
}

// --------------------------------------------------------------------------
// Radial profile and decay

struct RadialShell {
  double r = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Shell statistics over bins of width h: bin k collects |x| in [(k-1/2)h, (k+1/2)h).
inline std::vector<RadialShell> radial_profile(const Field& u) {
  const GridSpec& g = u.grid();
  std::map<long, RadialShell> bins;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const long k = std::lround(radius(g, i) / g.spacing);
    auto [it, fresh] = bins.try_emplace(k);
    RadialShell& s = it->second;
    if (fresh) {
      s.r = static_cast<double>(k) * g.spacing;
      s.min = s.max = u[i];
    }
    s.mean += u[i];
    s.min = std::min(s.min, u[i]);
    s.max = std::max(s.max, u[i]);
    ++s.count;
  }
  std::vector<RadialShell> out;
  out.reserve(bins.size());
  for (auto& [k, s] : bins) {
    s.mean /= static_cast<double>(s.count);
    out.push_back(s);
  }
  return out;
}

/// Radius where the shell means fall through half the peak, linearly
/// interpolated between the last shell at or above it and the next one.
inline double half_height_radius(const std::vector<RadialShell>& shells) {
  double peak = 0.0;
  for (const auto& s : shells) peak = std::max(peak, std::abs(s.mean));
  std::size_t last = 0;
  for (std::size_t i = 0; i < shells.size(); ++i)
    if (std::abs(shells[i].mean) >= 0.5 * peak) last = i;
  if (shells.empty() || last + 1 >= shells.size()) return shells.empty() ? 0.0 : shells[last].r;
  const double a = std::abs(shells[last].mean), b = std::abs(shells[last + 1].mean);
  const double w = a > b ? (a - 0.5 * peak) / (a - b) : 0.0;
  return shells[last].r + w * (shells[last + 1].r - shells[last].r);
}

struct DecayWindow {
  double r1 = 0.0;
  double r2 = 0.0;
};

struct DecayFit {
  DecayWindow window;
  double slope = 0.0;
  double expected = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double r_squared = 0.0;
  std::size_t shells = 0;
  bool informational = false;
  std::vector<std::string> flags;

  double envelope_ratio() const { return c_lower > 0.0 ? c_upper / c_lower : INFINITY; }
};

inline constexpr std::size_t kMinDecayShells = 8;
inline constexpr double kNonPolynomialSlopeDrift = 0.25;

namespace detail {

struct LineFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace detail

/// Default window [3 r_half, L/2].
inline DecayWindow default_decay_window(const Field& u) {
  return {3.0 * half_height_radius(radial_profile(u)), 0.5 * u.grid().half_length};
}

/// Log-log least squares of the shell means over the window, with envelope
/// constants of u(r)(1 + r^{N+2s}). The model is optional; when given and
/// f is not O(t) near zero, the fit is informational.
inline DecayFit decay_fit(const Field& u, const FracParams& p, std::optional<DecayWindow> window = std::nullopt,
                          const NonlinearityModel* model = nullptr) {
  const auto shells = radial_profile(u);
  const double r_half = half_height_radius(shells);
  const DecayWindow w = window.value_or(DecayWindow{3.0 * r_half, 0.5 * u.grid().half_length});
  if (!(w.r1 >= 3.0 * r_half - 1e-12))
    throw InvalidParams("decay window starts at " + num_str(w.r1) + " < 3 x half-height radius " +
                        num_str(r_half));
  if (!(w.r2 <= 0.8 * u.grid().half_length + 1e-12))
    throw InvalidParams("decay window ends at " + num_str(w.r2) + " > 0.8 L");

  DecayFit fit;
  fit.window = w;
  fit.expected = -(p.dim + 2.0 * p.s);
  const bool sign_changing = u.min_value() < -1e-8 * u.max_abs();
  if (sign_changing) {
    fit.informational = true;
    fit.flags.push_back("sign-changing field: fitted |u|; the decay bound is not asserted for changing-sign solutions");
  }
  if (model && check_growth(*model, p).f5 != Verdict::Holds) {
    fit.informational = true;
    fit.flags.push_back("f is not O(t) near zero for " + model->describe() + ": fit is informational only");
  }

  std::vector<double> lx, ly, rs, vals;
  for (const auto& s : shells) {
    if (s.r < w.r1 || s.r > w.r2) continue;
    double v = s.mean;
    if (sign_changing) {
      v = 0.0;
      for (const auto& t : {s.min, s.max}) v = std::max(v, std::abs(t));
    }
    if (!(v > 0.0)) throw NegativeTail("shell mean " + num_str(v) + " at r = " + num_str(s.r));
    lx.push_back(std::log(s.r));
    ly.push_back(std::log(v));
    rs.push_back(s.r);
    vals.push_back(v);
  }
  fit.shells = lx.size();
  if (fit.shells < kMinDecayShells)
    throw WindowTooSmall(std::to_string(fit.shells) + " shells in [" + num_str(w.r1) + ", " +
                         num_str(w.r2) + "], need " + std::to_string(kMinDecayShells));

  const auto line = detail::least_squares(lx, ly);
  fit.slope = line.slope;
  fit.r_squared = line.r_squared;
  fit.c_lower = INFINITY;
  fit.c_upper = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double c = vals[i] * (1.0 + std::pow(rs[i], -fit.expected));
    fit.c_lower = std::min(fit.c_lower, c);
    fit.c_upper = std::max(fit.c_upper, c);
  }

  // a power law has the same slope on both halves of the window
  const std::size_t half = lx.size() / 2;
  const auto inner_fit = detail::least_squares({lx.begin(), lx.begin() + half}, {ly.begin(), ly.begin() + half});
  const auto outer_fit = detail::least_squares({lx.begin() + half, lx.end()}, {ly.begin() + half, ly.end()});
  const double drift = std::abs(outer_fit.slope - inner_fit.slope) / std::max(std::abs(fit.slope), 1e-300);
  if (drift > kNonPolynomialSlopeDrift || fit.r_squared < 0.99)
    fit.flags.push_back("non-polynomial: slope drifts by " + num_str(drift) + " across the window");
  return fit;
}

inline DecayFit decay_fit(const SolveResult& res, const FracParams& p, std::optional<DecayWindow> window = std::nullopt) {
  return decay_fit(res.u, p, window);
}

}  // namespace fchq
