#pragma once

// Variational core: D(u), J_mu(u), P_mu(u), the L2 gradient of J_mu, the
// dilation u(./t) and the Pohozaev time t* that puts u(./t*) on {P_mu = 0}.
//
//   kinetic A = ||(-Delta)^{s/2} u||^2,  mass B = ||u||^2,
//   D(u) = int (I_alpha * F(u)) F(u)
//   J = A/2 + mu B/2 - D/2
//   P = (N-2s)/2 A + N mu/2 B - (N+alpha)/2 D
//
// Under u -> u(./t) the triple (A, B, D) scales as (t^{N-2s}, t^N, t^{N+alpha}).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/fft.hpp"
#include "fchq/grid.hpp"
#include "fchq/nonlinearity.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq {

struct EnergyReport {
  double kinetic = 0.0;
  double mass = 0.0;
  double dterm = 0.0;
  double energy = 0.0;
  double pohozaev = 0.0;
  double grad_norm = 0.0;
};

inline double energy_from(const FracParams& p, double kinetic, double mass, double dterm) {
  return 0.5 * kinetic + 0.5 * p.mu * mass - 0.5 * dterm;
}

inline double pohozaev_from(const FracParams& p, double kinetic, double mass, double dterm) {
  const double n = p.dim;
  return 0.5 * (n - 2.0 * p.s) * kinetic + 0.5 * n * p.mu * mass - 0.5 * (n + p.alpha) * dterm;
}

/// Everything the solvers need about one field, computed with two FFTs on
/// the base grid and one padded Riesz convolution.
struct Evaluation {
  Field u;
  Field frac_lap;   // (-Delta)^s u
  Field F;          // F(u)
  Field potential;  // I_alpha * F(u)
  Field gradient;   // (-Delta)^s u + mu u - (I_alpha * F(u)) f(u)
  EnergyReport report;
};

/// Bundles grid, parameters and model with the operators they determine.
/// Immutable after construction; all methods are const and reentrant.
class ChoquardSystem {
 public:
  ChoquardSystem(const GridSpec& g, const FracParams& p, const NonlinearityModel& m,
                 SingularCellRule rule = SingularCellRule::LatticeSumQuartic)
      : grid_(g), params_(p), model_(m), riesz_(std::make_shared<RieszOperator>(g, p.alpha, rule)) {
    if (p.dim != g.dim) throw InvalidParams("parameter dimension does not match the grid");
    symbol_ = detail::power_multiplier(g, p.s);
    resolvent_.resize(symbol_.size());
    for (std::size_t i = 0; i < symbol_.size(); ++i) resolvent_[i] = 1.0 / (symbol_[i] + p.mu);
  }

  const GridSpec& grid() const { return grid_; }
  const FracParams& params() const { return params_; }
  const NonlinearityModel& model() const { return model_; }
  const RieszOperator& riesz() const { return *riesz_; }

  Field F_of(const Field& u) const {
    return u.map([this](double t) { return eval_F(model_, t); });
  }
  Field f_of(const Field& u) const {
    return u.map([this](double t) { return eval_f(model_, t); });
  }

  Field frac_lap(const Field& u) const { return detail::apply_multiplier(u, symbol_); }
  Field resolvent(const Field& rhs) const { return detail::apply_multiplier(rhs, resolvent_); }

  /// ||(-Delta)^{s/2} u||^2 by Parseval.
  double kinetic(const Field& u) const {
    auto c = detail::to_complex(u);
    fft::forward(c, grid_.dim, static_cast<int>(grid_.points_per_axis));
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) sum += symbol_[i] * std::norm(c[i]);
    return sum * grid_.cell_volume() / static_cast<double>(c.size());
  }

  double mass(const Field& u) const { return inner(u, u); }

  double dterm(const Field& u) const {
    const Field F = F_of(u);
    return inner(riesz_->apply(F), F);
  }

  double energy(const Field& u) const { return energy_from(params_, kinetic(u), mass(u), dterm(u)); }
  double pohozaev(const Field& u) const { return pohozaev_from(params_, kinetic(u), mass(u), dterm(u)); }

  Evaluation evaluate(const Field& u, Warnings* warnings = nullptr) const {
    Field lap = frac_lap(u);
    Field F = F_of(u);
    Field pot = riesz_->apply(F, warnings);
    return assemble(u, std::move(lap), std::move(F), std::move(pot));
  }

  /// Builds the evaluation from precomputed operator outputs.
  Evaluation assemble(const Field& u, Field lap, Field F, Field pot) const {
    std::vector<double> grad(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      grad[i] = lap[i] + params_.mu * u[i] - pot[i] * eval_f(model_, u[i]);
    Evaluation ev{u, std::move(lap), std::move(F), std::move(pot), Field(grid_, std::move(grad)), {}};
    ev.report.kinetic = inner(u, ev.frac_lap);
    ev.report.mass = inner(u, u);
    ev.report.dterm = inner(ev.potential, ev.F);
    ev.report.energy = energy_from(params_, ev.report.kinetic, ev.report.mass, ev.report.dterm);
    ev.report.pohozaev = pohozaev_from(params_, ev.report.kinetic, ev.report.mass, ev.report.dterm);
    ev.report.grad_norm = l2_norm(ev.gradient);
    return ev;
  }

  EnergyReport report(const Field& u) const { return evaluate(u).report; }

  Field gradient(const Field& u) const { return evaluate(u).gradient; }

  /// (I_alpha * F(u)) f(u)
  Field nonlinear_term(const Field& u) const {
    const Field pot = riesz_->apply(F_of(u));
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = pot[i] * eval_f(model_, u[i]);
    return Field(grid_, std::move(v));
  }

 private:
  GridSpec grid_;
  FracParams params_;
  NonlinearityModel model_;
  std::shared_ptr<const RieszOperator> riesz_;
  std::vector<double> symbol_;
  std::vector<double> resolvent_;
};

// Free-function forms; each builds a throwaway system.

inline double dterm(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  return ChoquardSystem(u.grid(), p, m).dterm(u);
}

inline double energy(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  return ChoquardSystem(u.grid(), p, m).energy(u);
}

inline double pohozaev(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  return ChoquardSystem(u.grid(), p, m).pohozaev(u);
}

inline Field gradient(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  return ChoquardSystem(u.grid(), p, m).gradient(u);
}

inline EnergyReport energy_report(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  return ChoquardSystem(u.grid(), p, m).report(u);
}

// --------------------------------------------------------------------------
// Dilation

struct DilateOptions {
  double t_min = 0.25;
  double t_max = 4.0;
  // Widening (t > 1) must leave the outer 10% shell below this fraction of
  // the peak, otherwise periodic images contaminate the result.
  double contamination_tol = 5e-2;
};

namespace detail {

// Smooth cutoff: 1 on [0, L], 0 beyond 1.5 L.
inline double outer_taper(double a, double L) {
  if (a <= L) return 1.0;
  if (a >= 1.5 * L) return 0.0;
  const double q = (a - L) / (0.5 * L);
  const double up = std::exp(-1.0 / (1.0 - q));
  const double down = std::exp(-1.0 / q);
  return up / (up + down);
}

// 1D band-limited interpolation matrix: row j evaluates the trigonometric
// interpolant (Nyquist mode as a cosine) at x_j / t. Beyond the box the
// interpolant is its periodic continuation, which near the faces repeats the
// small tail of the opposite face; it is tapered to zero by 1.5 L so that
// strong compression never reads the central peak of a periodic image.
inline std::vector<double> dilation_matrix(const GridSpec& g, double t) {
  const std::size_t n = g.points_per_axis;
  const double nd = static_cast<double>(n);
  std::vector<double> mat(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = g.coordinate(j) / t;
    const double taper = outer_taper(std::abs(y), g.half_length);
    if (taper == 0.0) continue;
    for (std::size_t m = 0; m < n; ++m) {
      const double theta = std::remainder(std::numbers::pi * (y - g.coordinate(m)) / g.half_length,
                                          2.0 * std::numbers::pi);
      double dirichlet;
      if (theta == 0.0)
        dirichlet = nd - 1.0;
      else
        dirichlet = std::sin(0.5 * (nd - 1.0) * theta) / std::sin(0.5 * theta);
      mat[j * n + m] = taper * (dirichlet + std::cos(0.5 * nd * theta)) / nd;
    }
  }
  return mat;
}

// out[o, j, i] = sum_m mat[j, m] in[o, m, i] along one axis.
inline std::vector<double> apply_along_axis(const std::vector<double>& in, const GridSpec& g, int axis,
                                            const std::vector<double>& mat) {
  const std::size_t n = g.points_per_axis;
  std::size_t outer = 1, inner_sz = 1;
  for (int d = 0; d < axis; ++d) outer *= n;
  for (int d = axis + 1; d < g.dim; ++d) inner_sz *= n;
  std::vector<double> out(in.size(), 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = in.data() + o * n * inner_sz;
    double* dst = out.data() + o * n * inner_sz;
    for (std::size_t j = 0; j < n; ++j) {
      double* row = dst + j * inner_sz;
      const double* mrow = mat.data() + j * n;
      if (inner_sz == 1) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) acc += mrow[m] * src[m];
        row[0] = acc;
      } else {
        for (std::size_t m = 0; m < n; ++m) {
          const double w = mrow[m];
          const double* s = src + m * inner_sz;
          for (std::size_t i = 0; i < inner_sz; ++i) row[i] += w * s[i];
        }
      }
    }
  }
  return out;
}

}  // namespace detail

/// u(x/t) by trigonometric interpolation on the same grid.
inline Field dilate(const Field& u, double t, const DilateOptions& opts = {}) {
  if (!(t >= opts.t_min && t <= opts.t_max))
    throw DilationRange("t = " + num_str(t) + " outside [" + num_str(opts.t_min) + ", " +
                        num_str(opts.t_max) + "]");
  if (t == 1.0) return u;
  const GridSpec& g = u.grid();
  const auto mat = detail::dilation_matrix(g, t);
  std::vector<double> v(u.values().begin(), u.values().end());
  for (int axis = 0; axis < g.dim; ++axis) v = detail::apply_along_axis(v, g, axis, mat);
  Field out(g, std::move(v));
  if (t > 1.0) {
    const double ratio = boundary_ratio(out);
    if (ratio > opts.contamination_tol && ratio > boundary_ratio(u))
      throw BoundaryContamination("dilation by t = " + num_str(t) + " pushes " + num_str(ratio) +
                                  " of the peak into the outer shell");
  }
  return out;
}

// --------------------------------------------------------------------------
// Pohozaev time

/// Unique positive root of
///   g(t) = (N-2s)/2 A + N mu/2 B t^{2s} - (N+alpha)/2 D t^{2s+alpha},
/// i.e. P_mu(u(./t)) / t^{N-2s} = 0, from the scalars of u.
inline double pohozaev_time(const FracParams& p, double kinetic, double mass, double dterm) {
  if (!(dterm > 0.0)) throw NoPohozaevTime("D(u) = " + num_str(dterm) + " is not positive");
  const double n = p.dim;
  const double c1 = 0.5 * (n - 2.0 * p.s) * kinetic;
  const double c2 = 0.5 * n * p.mu * mass;
  const double c3 = 0.5 * (n + p.alpha) * dterm;
  auto g = [&](double logt) {
    const double a = std::exp(2.0 * p.s * logt);
    return c1 + c2 * a - c3 * a * std::exp(p.alpha * logt);
  };
  if (!(c1 + c2 > 0.0)) throw NoPohozaevTime("u has no kinetic or mass contribution");
  double lo = 0.0, hi = 0.0;
  while (g(hi) >= 0.0) {
    hi += 1.0;
    if (hi > 700.0) throw NoPohozaevTime("no sign change found");
  }
  while (g(lo) < 0.0) {
    lo -= 1.0;
    if (lo < -700.0) throw NoPohozaevTime("no sign change found");
  }
  // g(lo) >= 0 > g(hi); bisect in log t until the bracket is 1e-12 relative
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (g(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

inline double pohozaev_time(const Field& u, const NonlinearityModel& m, const FracParams& p) {
  const ChoquardSystem sys(u.grid(), p, m);
  return pohozaev_time(p, sys.kinetic(u), sys.mass(u), sys.dterm(u));
}

/// J_mu(u(./t)) from the scalars of u through the exact scaling laws.
inline double dilated_energy(const FracParams& p, double kinetic, double mass, double dterm, double t) {
  const double n = p.dim;
  return energy_from(p, std::pow(t, n - 2.0 * p.s) * kinetic, std::pow(t, n) * mass, std::pow(t, n + p.alpha) * dterm);
}

}  // namespace fchq
