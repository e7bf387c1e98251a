#pragma once

// Slow reference implementations for tests. None of them calls the FFT or
// the Riesz operator; they sum kernels directly.

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/functionals.hpp"
#include "fchq/grid.hpp"
#include "fchq/nonlinearity.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq::oracle {

struct OracleConfig {
  std::size_t max_points = 4096;
  SingularCellRule singular_cell_rule = SingularCellRule::LatticeSumQuartic;
  // Gagliardo/direct Laplacian: sum over periodic images of the kernel and
  // subtract the near-diagonal defect terms of the punctured sum.
  bool periodic_images = true;
  bool diagonal_corrections = true;
};

inline void require_small(const Field& u, const OracleConfig& cfg) {
  if (u.size() > cfg.max_points)
    throw TooLarge(std::to_string(u.size()) + " points exceeds the oracle cap of " + std::to_string(cfg.max_points));
}

// --------------------------------------------------------------------------
// Direct Riesz sum

/// h^N sum_j K(x_i - x_j) u_j over all pairs, no periodic images.
inline Field direct_conv(const Field& u, double alpha, const OracleConfig& cfg = {}) {
  require_small(u, cfg);
  const GridSpec& g = u.grid();
  const int N = g.dim;
  if (!(alpha > 0.0 && alpha < N)) throw InvalidParams("alpha must lie in (0,N)");
  const double A = std::tgamma(0.5 * (N - alpha)) /
                   (std::pow(2.0, alpha) * std::pow(std::numbers::pi, 0.5 * N) * std::tgamma(0.5 * alpha));
  const double h = g.spacing;
  const double hN = std::pow(h, N);
  const auto near = near_field_weights(N, alpha, cfg.singular_cell_rule);
  const double near_unit = A * std::pow(h, alpha);

  std::vector<std::array<long, 3>> idx(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto a = unflatten(g, i);
    idx[i] = {static_cast<long>(a[0]), static_cast<long>(a[1]), static_cast<long>(a[2])};
  }
  std::vector<double> out(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < u.size(); ++j) {
      long m2 = 0;
      int nonzero = 0;
      for (int d = 0; d < N; ++d) {
        const long dd = idx[i][d] - idx[j][d];
        m2 += dd * dd;
        nonzero += dd != 0;
      }
      double w;
      if (m2 == 0) {
        w = near_unit * near.center;
      } else {
        w = A * hN * std::pow(h * std::sqrt(static_cast<double>(m2)), alpha - N);
        if (m2 == 1) w += near_unit * near.axis1;
        if (m2 == 4 && nonzero == 1) w += near_unit * near.axis2;
        if (m2 == 2 && nonzero == 2) w += near_unit * near.diagonal;
      }
      acc += static_cast<long double>(w) * u[j];
    }
    out[i] = static_cast<double>(acc);
  }
  return Field(g, std::move(out));
}

// --------------------------------------------------------------------------
// One-dimensional periodic singular sums

namespace detail {

/// Hurwitz zeta sum_{k>=0} (q+k)^{-b}, b > 1, q > 0, by Euler-Maclaurin.
inline double hurwitz_zeta(double b, double q) {
  const int M = 12;
  double sum = 0.0;
  for (int k = 0; k < M; ++k) sum += std::pow(q + k, -b);
  const double a = q + M;
  sum += std::pow(a, 1.0 - b) / (b - 1.0) + 0.5 * std::pow(a, -b);
  // B_{2j}/(2j)!
  static const double coef[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0,
                                -691.0 / 1307674368000.0};
  double rising = b;  // b (b+1) ... (b+2j-2)
  double power = std::pow(a, -b - 1.0);
  for (int j = 0; j < 6; ++j) {
    sum += coef[j] * rising * power;
    rising *= (b + 2 * j + 1) * (b + 2 * j + 2);
    power /= a * a;
  }
  return sum;
}

/// sum_m |z + P m|^{-b} for 0 < |z| < P, period P.
inline double periodic_kernel(double z, double b, double period) {
  double q = std::fmod(std::abs(z), period) / period;
  return std::pow(period, -b) * (hurwitz_zeta(b, q) + hurwitz_zeta(b, 1.0 - q));
}

/// Periodic fourth-order central differences.
inline std::vector<double> derivative(const std::vector<double>& u, double h, int order) {
  const std::size_t n = u.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m2 = u[(i + n - 2) % n], m1 = u[(i + n - 1) % n], c = u[i], p1 = u[(i + 1) % n],
                 p2 = u[(i + 2) % n];
    if (order == 1)
      d[i] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    else
      d[i] = (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
  }
  return d;
}

inline double plain_kernel(double z, double b, double period, bool images) {
  return images ? periodic_kernel(z, b, period) : std::pow(std::abs(z), -b);
}

}  // namespace detail

/// h^2 sum_{i != j} (u_i - u_j)^2 K(x_i - x_j) with K = |z|^{-1-2s} (or its
/// periodic image sum), minus the defect terms
///   2 zeta(2s-1) h^{2-2s} int u'^2 - zeta(2s-3)/6 h^{4-2s} int u''^2
/// of the punctured sum when corrections are on. Constant-free.
inline double gagliardo_double_integral(const Field& u, double s, const OracleConfig& cfg = {}) {
  require_small(u, cfg);
  const GridSpec& g = u.grid();
  if (g.dim != 1) throw UnsupportedDim("Gagliardo oracle is one-dimensional");
  if (!(s > 0.0 && s < 1.0)) throw InvalidParams("s must lie in (0,1)");
  const std::size_t n = g.points_per_axis;
  const double h = g.spacing;
  const double b = 1.0 + 2.0 * s;
  const double period = 2.0 * g.half_length;
  std::vector<double> kern(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    // offset on the periodic ring when images are used, plain distance otherwise
    kern[k] = detail::plain_kernel(static_cast<double>(k) * h, b, period, cfg.periodic_images);
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double diff = u[i] - u[j];
      const std::size_t k = i > j ? i - j : j - i;
      acc += static_cast<long double>(diff * diff) * kern[k];
    }
  double total = static_cast<double>(acc) * h * h;
  if (cfg.diagonal_corrections) {
    std::vector<double> v(u.values().begin(), u.values().end());
    const auto d1 = detail::derivative(v, h, 1);
    const auto d2 = detail::derivative(v, h, 2);
    double i1 = 0.0, i2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      i1 += d1[i] * d1[i];
      i2 += d2[i] * d2[i];
    }
    i1 *= h;
    i2 *= h;
    total -= 2.0 * boost::math::zeta(2.0 * s - 1.0) * std::pow(h, 2.0 - 2.0 * s) * i1;
    total += boost::math::zeta(2.0 * s - 3.0) / 6.0 * std::pow(h, 4.0 - 2.0 * s) * i2;
  }
  return total;
}

/// C_{1,s} P.V. int (u(x) - u(y)) K(x - y) dy at every grid point, by the
/// punctured periodic sum plus the defect terms
///   zeta(2s-1) h^{2-2s} u'' + zeta(2s-3)/12 h^{4-2s} u''''.
/// `exponent_s` is the order s of (-Delta)^s.
inline Field direct_frac_laplacian(const Field& u, double exponent_s, const OracleConfig& cfg = {}) {
  require_small(u, cfg);
  const GridSpec& g = u.grid();
  if (g.dim != 1) throw UnsupportedDim("direct fractional Laplacian oracle is one-dimensional");
  const double s = exponent_s;
  if (!(s > 0.0 && s < 1.0)) throw InvalidParams("s must lie in (0,1)");
  const std::size_t n = g.points_per_axis;
  const double h = g.spacing;
  const double b = 1.0 + 2.0 * s;
  const double period = 2.0 * g.half_length;
  const double cns = std::pow(4.0, s) * std::tgamma(0.5 + s) / (std::sqrt(std::numbers::pi) * std::abs(std::tgamma(-s)));
  std::vector<double> kern(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double z = static_cast<double>(k <= n / 2 ? k : n - k) * h;
    kern[k] = detail::plain_kernel(z, b, period, cfg.periodic_images);
  }
  std::vector<double> v(u.values().begin(), u.values().end());
  std::vector<double> d2, d4;
  if (cfg.diagonal_corrections) {
    d2 = detail::derivative(v, h, 2);
    d4 = detail::derivative(d2, h, 2);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (std::size_t k = 1; k < n; ++k) acc += static_cast<long double>(v[i] - v[(i + k) % n]) * kern[k];
    double val = static_cast<double>(acc) * h;
    if (cfg.diagonal_corrections) {
      val += boost::math::zeta(2.0 * s - 1.0) * std::pow(h, 2.0 - 2.0 * s) * d2[i];
      val += boost::math::zeta(2.0 * s - 3.0) / 12.0 * std::pow(h, 4.0 - 2.0 * s) * d4[i];
    }
    out[i] = cns * val;
  }
  return Field(g, std::move(out));
}

// --------------------------------------------------------------------------
// Finite-difference gradients

inline void check_eps(double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw InvalidParams("eps must lie in [1e-7, 1e-3]");
}

/// Central differences of J along every coordinate direction, divided by the
/// cell volume so that the result approximates the L2 gradient.
inline Field fd_gradient(const Field& u, const NonlinearityModel& m, const FracParams& p, double eps = 1e-5,
                         const OracleConfig& cfg = {}) {
  check_eps(eps);
  require_small(u, cfg);
  const ChoquardSystem sys(u.grid(), p, m);
  std::vector<double> base(u.values().begin(), u.values().end());
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto plus = base, minus = base;
    plus[i] += eps;
    minus[i] -= eps;
    const double jp = sys.energy(Field(u.grid(), std::move(plus)));
    const double jm = sys.energy(Field(u.grid(), std::move(minus)));
    out[i] = (jp - jm) / (2.0 * eps * u.grid().cell_volume());
  }
  return Field(u.grid(), std::move(out));
}

struct DirectionalCheck {
  double fd = 0.0;
  double analytic = 0.0;
  double rel_err() const { return std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-300); }
};

/// Central differences of J along `directions` random unit-L2 fields,
/// compared with <J'(u), d>.
inline std::vector<DirectionalCheck> fd_directional(const Field& u, const NonlinearityModel& m, const FracParams& p,
                                                    int directions = 20, double eps = 1e-5, std::uint64_t seed = 11) {
  check_eps(eps);
  const ChoquardSystem sys(u.grid(), p, m);
  const Field grad = sys.gradient(u);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DirectionalCheck> out;
  for (int k = 0; k < directions; ++k) {
    std::vector<double> d(u.size());
    for (auto& x : d) x = normal(rng);
    Field dir(u.grid(), std::move(d));
    dir = scale(1.0 / l2_norm(dir), dir);
    const double jp = sys.energy(combine(1.0, u, eps, dir));
    const double jm = sys.energy(combine(1.0, u, -eps, dir));
    out.push_back({(jp - jm) / (2.0 * eps), inner(grad, dir)});
  }
  return out;
}

}  // namespace fchq::oracle
