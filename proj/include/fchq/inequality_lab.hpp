#pragma once

// Randomised batteries for the inequalities the existence and regularity
// arguments rest on: the truncation lemma, the gamma-linear truncation h and
// its Jensen bound, Lipschitz composition and modulus contraction of the
// seminorm, Hardy-Littlewood-Sobolev and the fractional Sobolev embedding.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/functionals.hpp"
#include "fchq/grid.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq {

struct IneqReport {
  std::string name;
  std::size_t trials = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  // empirical constant (sweeps) or largest ratio across refinement
  double max_ratio = 0.0;
  std::vector<std::string> notes;

  void record(double normalized_margin, double tolerance) {
    ++trials;
    worst_margin = std::min(worst_margin, normalized_margin);
    if (normalized_margin < -tolerance) ++violations;
  }
};

inline constexpr double kScalarTolerance = 1e-12;
inline constexpr double kSeminormTolerance = 1e-8;

// --------------------------------------------------------------------------
// Truncation lemma

inline double truncate(double t, double k) { return std::clamp(t, -k, k); }

struct Margin {
  double value = 0.0;  // RHS - LHS
  double scale = 0.0;  // rounding scale of the two sides

  double normalized() const { return scale > 0.0 ? value / scale : 0.0; }
};

/// (a-b)(a_k|a_k|^{r-2} - b_k|b_k|^{r-2}) - 4(r-1)/r^2 (|a_k|^{r/2} - |b_k|^{r/2})^2
inline Margin truncation_inequality(double a, double b, double r, double k) {
  if (!(r >= 2.0)) throw DomainError("truncation lemma needs r >= 2");
  if (!(k >= 0.0)) throw DomainError("truncation level must be nonnegative");
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("a and b must be finite");
  const double ak = truncate(a, k), bk = truncate(b, k);
  auto odd_pow = [r](double x) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), r - 1.0), x); };
  const double pa = std::pow(std::abs(ak), 0.5 * r), pb = std::pow(std::abs(bk), 0.5 * r);
  const double coef = 4.0 * (r - 1.0) / (r * r);
  const double rhs = (a - b) * (odd_pow(ak) - odd_pow(bk));
  const double lhs = coef * (pa - pb) * (pa - pb);
  const double scale = std::abs(a - b) * (std::abs(odd_pow(ak)) + std::abs(odd_pow(bk))) + coef * (pa + pb) * (pa + pb);
  return {rhs - lhs, scale};
}

// --------------------------------------------------------------------------
// gamma-linear truncation

inline double trunc_h(double t, double T, double gamma) {
  if (t <= 0.0) return 0.0;
  if (t <= T) return std::pow(t, gamma);
  return gamma * std::pow(T, gamma - 1.0) * t - (gamma - 1.0) * std::pow(T, gamma);
}

inline double trunc_h_prime(double t, double T, double gamma) {
  if (t <= 0.0) return 0.0;
  if (t <= T) return gamma * std::pow(t, gamma - 1.0);
  return gamma * std::pow(T, gamma - 1.0);
}

namespace detail {

// int_a^b h'(x)^2 dx for 0 <= a <= b, tanh-sinh on each smooth piece. Its
// error estimate is the difference of successive levels, which trails the
// true error by roughly its square, hence the loose stopping tolerance.
inline double trunc_h_prime_sq_integral(double a, double b, double T, double gamma) {
  if (!(b > a)) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  auto sq = [&](double x) {
    const double d = trunc_h_prime(x, T, gamma);
    return d * d;
  };
  // shifted to start at 0 so no abscissa rounds onto a nonzero endpoint
  auto piece = [&](double lo, double hi) { return ts.integrate([&](double y) { return sq(lo + y); }, 0.0, hi - lo, 1e-9); };
  double total = 0.0;
  const double knee = std::min(b, T);
  if (knee > a) total += piece(a, knee);
  if (b > T) total += piece(std::max(a, T), b);
  return total;
}

}  // namespace detail

/// h~(t) = int_0^t h'(r)^2 dr by adaptive quadrature.
inline double trunc_h_tilde(double t, double T, double gamma) {
  if (t <= 0.0) return 0.0;
  return detail::trunc_h_prime_sq_integral(0.0, t, T, gamma);
}

/// h~(t) - h~(r) as one integral over [r, t].
inline double trunc_h_tilde_difference(double t, double r, double T, double gamma) {
  const double lo = std::max(std::min(t, r), 0.0), hi = std::max(std::max(t, r), 0.0);
  const double v = detail::trunc_h_prime_sq_integral(lo, hi, T, gamma);
  return t >= r ? v : -v;
}

/// Closed form of h~, for cross-checking the quadrature.
inline double trunc_h_tilde_closed_form(double t, double T, double gamma) {
  if (t <= 0.0) return 0.0;
  const double knee = std::min(t, T);
  double total = gamma * gamma * std::pow(knee, 2.0 * gamma - 1.0) / (2.0 * gamma - 1.0);
  if (t > T) {
    const double slope = gamma * std::pow(T, gamma - 1.0);
    total += slope * slope * (t - T);
  }
  return total;
}

struct TruncHMargins {
  Margin lower;       // h >= 0
  Margin upper;       // h <= |t|^gamma
  Margin deriv_lower; // t h' >= 0
  Margin deriv_upper; // t h' <= gamma h
  Margin jensen;      // |h(t)-h(r)|^2 <= (h~(t)-h~(r))(t-r)
};

inline TruncHMargins trunc_h_properties(double t, double r, double T, double gamma) {
  if (!(gamma > 1.0)) throw DomainError("gamma must exceed 1");
  if (!(T > 0.0)) throw DomainError("truncation point must be positive");
  TruncHMargins m;
  const double h = trunc_h(t, T, gamma);
  const double pw = std::pow(std::abs(t), gamma);
  const double th = t * trunc_h_prime(t, T, gamma);
  m.lower = {h, std::abs(h)};
  m.upper = {pw - h, pw + std::abs(h)};
  m.deriv_lower = {th, std::abs(th)};
  m.deriv_upper = {gamma * h - th, gamma * std::abs(h) + std::abs(th)};
  const double hr = trunc_h(r, T, gamma);
  const double dt = trunc_h_tilde_difference(t, r, T, gamma);
  const double lhs = (h - hr) * (h - hr);
  const double rhs = dt * (t - r);
  // the last term is the size of the rounding in h(t) - h(r) for near ties
  m.jensen = {rhs - lhs, std::abs(rhs) + lhs + 2.0 * std::abs(h - hr) * (std::abs(h) + std::abs(hr))};
  return m;
}

inline TruncHMargins trunc_h_properties(double t, double T, double gamma) { return trunc_h_properties(t, t, T, gamma); }

// --------------------------------------------------------------------------
// Scalar battery

struct ScalarBatteryOptions {
  std::size_t trials = 1000000;
  std::uint64_t seed = 20240607;
};

inline std::vector<IneqReport> scalar_battery(const ScalarBatteryOptions& opts = {}) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  // values spread over several decades and both signs, with ties and
  // near-ties mixed in
  auto sample_real = [&](double span) {
    const double mag = std::pow(10.0, uniform(-3.0, std::log10(span)));
    return unit(rng) < 0.5 ? -mag : mag;
  };

  IneqReport lemma{"truncation_lemma"}, a1{"trunc_h_bounds"}, a2{"trunc_h_derivative"}, a3{"trunc_h_limit"},
      jensen{"jensen_bound"};
  lemma.notes.push_back("r in [2,10], k in [0,5], a,b in +-[1e-3,10]");
  a1.notes.push_back("t in +-[1e-3,20], T in (0,10], gamma in (1,5]");
  a2.notes = a1.notes;
  a3.notes.push_back("h_T(t) nondecreasing in T, <= t^gamma, equal for T >= t");
  jensen.notes.push_back("t,r in +-[1e-3,20]; h~ by quadrature");

  for (std::size_t i = 0; i < opts.trials; ++i) {
    const double r = uniform(2.0, 10.0);
    const double k = uniform(0.0, 5.0);
    const double a = sample_real(10.0);
    const double pick = unit(rng);
    const double b = pick < 0.05 ? a : (pick < 0.15 ? a * (1.0 + 1e-6 * uniform(-1.0, 1.0)) : sample_real(10.0));
    lemma.record(truncation_inequality(a, b, r, k).normalized(), kScalarTolerance);

    const double gamma = uniform(1.0 + 1e-6, 5.0);
    const double T = uniform(1e-3, 10.0);
    const double t = sample_real(20.0);
    const double s = unit(rng) < 0.1 ? t + 1e-7 * uniform(-1.0, 1.0) : sample_real(20.0);
    const auto m = trunc_h_properties(t, s, T, gamma);
    a1.record(std::min(m.lower.normalized(), m.upper.normalized()), kScalarTolerance);
    a2.record(std::min(m.deriv_lower.normalized(), m.deriv_upper.normalized()), kScalarTolerance);
    jensen.record(m.jensen.normalized(), kScalarTolerance);

    const double tp = std::abs(t);
    const double T1 = uniform(1e-3, 2.0 * tp), T2 = T1 * uniform(1.0, 4.0);
    const double h1 = trunc_h(tp, T1, gamma), h2 = trunc_h(tp, T2, gamma), pw = std::pow(tp, gamma);
    double lim = std::min((h2 - h1) / pw, (pw - h2) / pw);
    if (T2 >= tp) lim = std::min(lim, -std::abs(pw - h2) / pw);
    a3.record(lim, kScalarTolerance);
  }
  return {lemma, a1, a2, a3, jensen};
}

// --------------------------------------------------------------------------
// Lipschitz composition

struct LipschitzMap {
  std::string name;
  std::function<double(double)> fn;
  double lipschitz = 1.0;
};

inline LipschitzMap identity_map() {
  return {"identity", [](double t) { return t; }, 1.0};
}
inline LipschitzMap modulus_map() {
  return {"modulus", [](double t) { return std::abs(t); }, 1.0};
}
inline LipschitzMap clamp_map(double lo, double hi) {
  if (!(lo <= 0.0 && hi >= 0.0)) throw DomainError("clamp must fix 0");
  return {"clamp", [lo, hi](double t) { return std::clamp(t, lo, hi); }, 1.0};
}
inline LipschitzMap soft_threshold_map(double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("threshold must be nonnegative");
  return {"soft_threshold", [lambda](double t) { return std::copysign(std::max(std::abs(t) - lambda, 0.0), t); }, 1.0};
}
inline LipschitzMap truncation_map(double k) {
  if (!(k >= 0.0)) throw DomainError("truncation level must be nonnegative");
  return {"truncation", [k](double t) { return truncate(t, k); }, 1.0};
}
/// |T_k(t)|^{r/2}, the composition used with the truncation lemma.
inline LipschitzMap truncated_power_map(double k, double r) {
  if (!(k > 0.0 && r >= 2.0)) throw DomainError("truncated power needs k > 0, r >= 2");
  return {"truncated_power", [k, r](double t) { return std::pow(std::abs(truncate(t, k)), 0.5 * r); },
          0.5 * r * std::pow(k, 0.5 * r - 1.0)};
}

/// Lip(h)^2 [u]^2 - [h(u)]^2, normalised by Lip(h)^2 [u]^2.
inline Margin composition_seminorm_check(const Field& u, const LipschitzMap& h, const FracParams& p) {
  const double base = gagliardo_seminorm_sq(u, p);
  const double composed = gagliardo_seminorm_sq(u.map(h.fn), p);
  const double bound = h.lipschitz * h.lipschitz * base;
  return {bound - composed, bound + composed};
}

// --------------------------------------------------------------------------
// Random smooth fields

/// Sum of a few randomly placed, randomly signed Gaussians (width >= 4h and
/// <= L/6, so that the field is resolved and decayed at the faces).
inline Field random_smooth_field(const GridSpec& g, std::mt19937_64& rng, bool positive = false) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int bumps = 1 + static_cast<int>(unit(rng) * 4.0);
  struct Bump {
    std::array<double, 3> c;
    double w, a;
  };
  std::vector<Bump> list;
  const double wmin = 4.0 * g.spacing, wmax = std::max(wmin, g.half_length / 6.0);
  for (int b = 0; b < bumps; ++b) {
    Bump bp{};
    for (int d = 0; d < g.dim; ++d) bp.c[d] = (unit(rng) - 0.5) * 0.5 * g.half_length;
    bp.w = wmin + (wmax - wmin) * unit(rng);
    bp.a = (positive ? 1.0 : (unit(rng) < 0.5 ? -1.0 : 1.0)) * (0.2 + unit(rng));
    list.push_back(bp);
  }
  return Field::sample(g, [&](const std::array<double, 3>& x) {
    double v = 0.0;
    for (const auto& bp : list) {
      double r2 = 0.0;
      for (int d = 0; d < g.dim; ++d) r2 += (x[d] - bp.c[d]) * (x[d] - bp.c[d]);
      v += bp.a * std::exp(-0.5 * r2 / (bp.w * bp.w));
    }
    return v;
  });
}

inline double lp_norm(const Field& u, double q) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(std::abs(u[i]), q);
  return std::pow(integrate(Field(u.grid(), std::move(v))), 1.0 / q);
}

// --------------------------------------------------------------------------
// HLS and Sobolev sweeps

struct SweepOptions {
  int dim = 2;
  double half_length = 8.0;
  std::size_t points = 64;  // refined grid uses 2x
  std::size_t trials = 50;
  std::uint64_t seed = 7;
};

/// |int (I_alpha * g) h| / (||g||_r ||h||_t) for 1/r + 1/t = (N+alpha)/N.
inline double hls_ratio(const Field& g, const Field& h, double alpha, double r) {
  const int n = g.grid().dim;
  const double inv_t = (n + alpha) / n - 1.0 / r;
  const double denom = lp_norm(g, r) * lp_norm(h, 1.0 / inv_t);
  if (denom == 0.0) return 0.0;
  return std::abs(inner(riesz_potential(g, alpha), h)) / denom;
}

/// Admissible 1/r values: a quarter, half and three quarters of the way
/// across (alpha/N, 1).
inline std::vector<double> hls_exponents(int dim, double alpha) {
  const double lo = alpha / dim;
  return {1.0 / (lo + 0.25 * (1.0 - lo)), 1.0 / (lo + 0.5 * (1.0 - lo)), 1.0 / (lo + 0.75 * (1.0 - lo))};
}

inline IneqReport hls_sweep(const FracParams& p, const SweepOptions& opts = {}) {
  IneqReport rep{"hls"};
  std::mt19937_64 rng(opts.seed);
  const GridSpec coarse = make_grid(p.dim, opts.half_length, opts.points);
  const GridSpec fine = make_grid(p.dim, opts.half_length, 2 * opts.points);
  const auto exps = hls_exponents(p.dim, p.alpha);
  double worst_growth = 0.0;
  for (std::size_t k = 0; k < opts.trials; ++k) {
    const std::uint64_t s1 = rng(), s2 = rng();
    const double r = exps[k % exps.size()];
    // nonnegative pairs: signed ones can cancel and make the ratio meaningless
    auto make = [](const GridSpec& g, std::uint64_t s) {
      std::mt19937_64 local(s);
      return random_smooth_field(g, local, true);
    };
    const double rc = hls_ratio(make(coarse, s1), make(coarse, s2), p.alpha, r);
    const double rf = hls_ratio(make(fine, s1), make(fine, s2), p.alpha, r);
    rep.max_ratio = std::max({rep.max_ratio, rc, rf});
    worst_growth = std::max(worst_growth, rc > 0.0 ? rf / rc : 0.0);
    // refinement must not blow the ratio up by more than 2x
    rep.record(rc > 0.0 ? (2.0 - rf / rc) : 1.0, 0.0);
  }
  rep.notes.push_back("empirical constant (max ratio) " + num_str(rep.max_ratio) + "; worst refinement growth " +
                      num_str(worst_growth));
  return rep;
}

/// ||u||_{2*_s} / ||(-Delta)^{power} u||_2.
inline double sobolev_ratio(const Field& u, const FracParams& p, double power) {
  const double denom = l2_norm(frac_laplacian(u, power));
  if (denom == 0.0) return 0.0;
  return lp_norm(u, p.two_star_s) / denom;
}

/// max/min - 1 of the Sobolev ratio with seminorm order `power` over the
/// dilates u(./t), t in [1/2, 2], of one Gaussian. Each dilate is sampled on
/// the box dilated by t, so its grid values are those of u and any drift
/// comes from a mismatch of the exponents alone.
inline double sobolev_dilation_spread(const FracParams& p, double power, const SweepOptions& opts = {}) {
  const double w = opts.half_length / 8.0;
  double lo = INFINITY, hi = 0.0;
  for (double t : {0.5, 0.75, 1.0, 1.5, 2.0}) {
    const GridSpec g = make_grid(p.dim, t * opts.half_length, 2 * opts.points);
    const Field u = Field::sample(g, [&](const std::array<double, 3>& x) {
      double r2 = 0.0;
      for (int d = 0; d < p.dim; ++d) r2 += x[d] * x[d];
      return std::exp(-0.5 * r2 / (w * w * t * t));
    });
    const double r = sobolev_ratio(u, p, power);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return hi / lo - 1.0;
}

inline IneqReport sobolev_sweep(const FracParams& p, const SweepOptions& opts = {}) {
  IneqReport rep{"sobolev"};
  std::mt19937_64 rng(opts.seed + 1);
  const GridSpec coarse = make_grid(p.dim, opts.half_length, opts.points);
  const GridSpec fine = make_grid(p.dim, opts.half_length, 2 * opts.points);
  double worst_growth = 0.0;
  for (std::size_t k = 0; k < opts.trials; ++k) {
    const std::uint64_t s1 = rng();
    auto make = [](const GridSpec& g, std::uint64_t s) {
      std::mt19937_64 local(s);
      return random_smooth_field(g, local);
    };
    const double rc = sobolev_ratio(make(coarse, s1), p, 0.5 * p.s);
    const double rf = sobolev_ratio(make(fine, s1), p, 0.5 * p.s);
    rep.max_ratio = std::max({rep.max_ratio, rc, rf});
    worst_growth = std::max(worst_growth, rc > 0.0 ? rf / rc : 0.0);
    rep.record(rc > 0.0 ? (2.0 - rf / rc) : 1.0, 0.0);
  }
  rep.notes.push_back("tested form: ||u||_{2*_s} <= C ||(-Delta)^{s/2} u||_2");
  rep.notes.push_back("empirical constant (max ratio) " + num_str(rep.max_ratio) + "; worst refinement growth " +
                      num_str(worst_growth));

  const double half = sobolev_dilation_spread(p, 0.5 * p.s, opts);
  const double full = sobolev_dilation_spread(p, p.s, opts);
  char buf[160];
  std::snprintf(buf, sizeof buf, "dilation spread of the s/2 form over t in [1/2,2]: %.3e", half);
  rep.notes.push_back(buf);
  std::snprintf(buf, sizeof buf, "the form with ||(-Delta)^s u||_2 is not dilation invariant: spread %.3e", full);
  rep.notes.push_back(buf);
  return rep;
}

// --------------------------------------------------------------------------
// Composition battery

inline std::vector<IneqReport> composition_battery(const FracParams& p, std::size_t fields, std::uint64_t seed) {
  IneqReport modulus{"modulus_contraction"}, lip{"lipschitz_composition"};
  const GridSpec g = make_grid(p.dim, 8.0, p.dim == 1 ? 256 : (p.dim == 2 ? 64 : 32));
  std::mt19937_64 rng(seed);
  const std::vector<LipschitzMap> maps{identity_map(), clamp_map(-0.5, 0.5), soft_threshold_map(0.2),
                                       truncation_map(0.3), truncated_power_map(0.8, 3.0)};
  for (std::size_t k = 0; k < fields; ++k) {
    const Field u = random_smooth_field(g, rng);
    modulus.record(composition_seminorm_check(u, modulus_map(), p).normalized(), kSeminormTolerance);
    for (const auto& h : maps) lip.record(composition_seminorm_check(u, h, p).normalized(), kSeminormTolerance);
  }
  modulus.notes.push_back("||(-Delta)^{s/2}|u|||^2 <= ||(-Delta)^{s/2}u||^2 on random signed fields");
  lip.notes.push_back("maps: identity, clamp, soft_threshold, truncation, truncated_power");
  return {modulus, lip};
}

}  // namespace fchq
