#pragma once

// Berestycki-Lions nonlinearities F with f = F', and growth metadata used to
// decide the standing assumptions analytically.
//
//   PurePower(r):          F(t) = |t|^r / r
//   DoublePower(r,h,a,b):  F(t) = a|t|^r / r + b|t|^h / h   (b = +1 cooperating,
//                          b = -1 competing in the usual parametrisation)
//   Saturable(c):          f(t) = t^3 / (1 + t^2/c^2),
//                          F(t) = (c^2/2) (t^2 - c^2 log(1 + t^2/c^2))

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq {

enum class ModelKind { PurePower, DoublePower, Saturable };

struct NonlinearityModel {
  ModelKind kind = ModelKind::PurePower;
  double r = 2.0;
  double h = 0.0;
  double coef_r = 1.0;
  double coef_h = 0.0;
  double scale = 1.0;
  // Declared exponents of F at 0 and at infinity (NaN = undeclared).
  double exponent_at_zero = std::nan("");
  double exponent_at_infinity = std::nan("");
  // |t| beyond which evaluation raises Overflow.
  double safe_range = 1e100;

  std::string describe() const;
};

inline NonlinearityModel pure_power(double r) {
  if (!(r > 1.0)) throw InvalidParams("pure power exponent must exceed 1");
  NonlinearityModel m;
  m.kind = ModelKind::PurePower;
  m.r = r;
  m.exponent_at_zero = r;
  m.exponent_at_infinity = r;
  m.safe_range = std::pow(10.0, 250.0 / r);
  return m;
}

inline NonlinearityModel double_power(double r, double h, double coef_r, double coef_h) {
  if (!(r > 1.0 && h > 1.0)) throw InvalidParams("double power exponents must exceed 1");
  if (coef_r == 0.0 || coef_h == 0.0) throw InvalidParams("double power coefficients must be nonzero");
  NonlinearityModel m;
  m.kind = ModelKind::DoublePower;
  m.r = r;
  m.h = h;
  m.coef_r = coef_r;
  m.coef_h = coef_h;
  m.exponent_at_zero = std::min(r, h);
  m.exponent_at_infinity = std::max(r, h);
  m.safe_range = std::pow(10.0, 250.0 / std::max(r, h));
  return m;
}

/// sign = +1 cooperating, -1 competing.
inline NonlinearityModel double_power(double r, double h, int sign) {
  return double_power(r, h, 1.0, sign >= 0 ? 1.0 : -1.0);
}

inline NonlinearityModel saturable(double scale = 1.0) {
  if (!(scale > 0.0)) throw InvalidParams("saturable scale must be positive");
  NonlinearityModel m;
  m.kind = ModelKind::Saturable;
  m.scale = scale;
  m.exponent_at_zero = 4.0;
  m.exponent_at_infinity = 2.0;
  m.safe_range = 1e150;
  return m;
}

inline std::string NonlinearityModel::describe() const {
  switch (kind) {
    case ModelKind::PurePower:
      return "pure_power(r=" + num_str(r) + ")";
    case ModelKind::DoublePower:
      return "double_power(r=" + num_str(r) + ", h=" + num_str(h) + ", a=" + num_str(coef_r) +
             ", b=" + num_str(coef_h) + ")";
    case ModelKind::Saturable:
      return "saturable(scale=" + num_str(scale) + ")";
  }
  return "unknown";
}

namespace detail {
inline void check_range(const NonlinearityModel& m, double t) {
  if (!std::isfinite(t)) throw Overflow("nonlinearity argument is not finite");
  if (std::abs(t) > m.safe_range)
    throw Overflow("|t| = " + num_str(std::abs(t)) + " beyond safe range of " + m.describe());
}
inline double signed_pow(double t, double e) { return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), e), t); }
}  // namespace detail

inline double eval_F(const NonlinearityModel& m, double t) {
  detail::check_range(m, t);
  if (t == 0.0) return 0.0;
  const double a = std::abs(t);
  switch (m.kind) {
    case ModelKind::PurePower:
      return std::pow(a, m.r) / m.r;
    case ModelKind::DoublePower:
      return m.coef_r * std::pow(a, m.r) / m.r + m.coef_h * std::pow(a, m.h) / m.h;
    case ModelKind::Saturable: {
      const double c2 = m.scale * m.scale;
      const double q = t * t / c2;
      // t^2 - c^2 log(1+q) = c^2 (q - log1p(q)); series for small q keeps precision
      double diff;
      if (q < 1e-3) {
        diff = q * q / 2.0 - q * q * q / 3.0 + q * q * q * q / 4.0 - q * q * q * q * q / 5.0;
      } else {
        diff = q - std::log1p(q);
      }
      return 0.5 * c2 * c2 * diff;
    }
  }
  throw UnknownModel("unrecognised model kind");
}

inline double eval_f(const NonlinearityModel& m, double t) {
  detail::check_range(m, t);
  if (t == 0.0) return 0.0;
  switch (m.kind) {
    case ModelKind::PurePower:
      return detail::signed_pow(t, m.r - 1.0);
    case ModelKind::DoublePower:
      return m.coef_r * detail::signed_pow(t, m.r - 1.0) + m.coef_h * detail::signed_pow(t, m.h - 1.0);
    case ModelKind::Saturable:
      return t * t * t / (1.0 + t * t / (m.scale * m.scale));
  }
  throw UnknownModel("unrecognised model kind");
}

/// F(t + dt) - F(t) without cancellation: dt * int_0^1 f(t + theta dt) dtheta.
inline double eval_F_increment(const NonlinearityModel& m, double t, double dt) {
  if (dt == 0.0) return 0.0;
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  return dt * Gauss::integrate([&](double th) { return eval_f(m, t + th * dt); }, 0.0, 1.0);
}

/// A positive t0 with F(t0) > 0, probing 2^k ordered by distance from 1
/// for |k| <= 10. Empty when F <= 0 on every probe.
inline std::optional<double> positive_point(const NonlinearityModel& m) {
  for (int step = 0; step <= 20; ++step) {
    const int k = (step % 2 == 0) ? step / 2 : -(step + 1) / 2;
    const double t = std::ldexp(1.0, k);
    if (eval_F(m, t) > 0.0) return t;
  }
  return std::nullopt;
}

// --------------------------------------------------------------------------
// Growth assumptions

enum class Verdict { Holds, Fails, Critical };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "holds";
    case Verdict::Fails:
      return "fails";
    case Verdict::Critical:
      return "critical";
  }
  return "?";
}

struct AssumptionReport {
  Verdict f1 = Verdict::Fails;
  Verdict f2_zero = Verdict::Fails;
  Verdict f2_infinity = Verdict::Fails;
  Verdict f3_zero = Verdict::Fails;
  Verdict f3_infinity = Verdict::Fails;
  Verdict f4 = Verdict::Fails;
  Verdict f5 = Verdict::Fails;
  double window_lower = 0.0;  // (N+alpha)/N
  double window_upper = 0.0;  // (N+alpha)/(N-2s)
  std::optional<double> f4_witness;

  bool f2() const { return f2_zero == Verdict::Holds && f2_infinity == Verdict::Holds; }
  bool f3() const { return f3_zero == Verdict::Holds && f3_infinity == Verdict::Holds; }
  bool existence_hypotheses() const { return f1 == Verdict::Holds && f2() && f3() && f4 == Verdict::Holds; }
};

inline AssumptionReport check_growth(const NonlinearityModel& m, const FracParams& p) {
  if (std::isnan(m.exponent_at_zero) || std::isnan(m.exponent_at_infinity))
    throw UnknownModel("model " + m.describe() + " has undeclared growth exponents");
  AssumptionReport rep;
  const double n = p.dim;
  rep.window_lower = (n + p.alpha) / n;
  rep.window_upper = (n + p.alpha) / (n - 2.0 * p.s);
  const double e0 = m.exponent_at_zero;
  const double einf = m.exponent_at_infinity;

  rep.f1 = e0 > 1.0 ? Verdict::Holds : Verdict::Fails;
  rep.f2_zero = e0 >= rep.window_lower ? Verdict::Holds : Verdict::Fails;
  rep.f2_infinity = einf <= rep.window_upper ? Verdict::Holds : Verdict::Fails;
  rep.f3_zero = e0 > rep.window_lower ? Verdict::Holds : (e0 == rep.window_lower ? Verdict::Critical : Verdict::Fails);
  rep.f3_infinity =
      einf < rep.window_upper ? Verdict::Holds : (einf == rep.window_upper ? Verdict::Critical : Verdict::Fails);
  rep.f5 = e0 >= 2.0 ? Verdict::Holds : Verdict::Fails;

  for (int k = -40; k <= 40; ++k) {
    const double t = std::pow(10.0, k / 8.0);
    if (t > m.safe_range) break;
    if (eval_F(m, t) != 0.0 || eval_F(m, -t) != 0.0) {
      rep.f4 = Verdict::Holds;
      rep.f4_witness = eval_F(m, t) != 0.0 ? t : -t;
      break;
    }
  }
  return rep;
}

}  // namespace fchq
