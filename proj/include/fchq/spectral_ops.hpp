#pragma once

// Fourier-multiplier realisations of (-Delta)^s, the resolvent
// ((-Delta)^s + mu)^{-1}, the Gagliardo seminorm, and the free-space Riesz
// potential I_alpha * u on the truncated box.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/expint.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "fchq/error.hpp"
#include "fchq/fft.hpp"
#include "fchq/grid.hpp"

namespace fchq {

using Warnings = std::vector<std::string>;

struct FracParams {
  int dim = 0;
  double s = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
  double c_ns = 0.0;        // singular-integral constant of (-Delta)^s
  double a_nalpha = 0.0;    // Riesz kernel constant
  double two_star_s = 0.0;  // 2N/(N-2s)
};

/// C_{N,s} = 4^s Gamma((N+2s)/2) / (pi^{N/2} |Gamma(-s)|)
inline double frac_laplacian_constant(int dim, double s) {
  const double n = dim;
  return std::exp(s * std::log(4.0) + std::lgamma((n + 2.0 * s) / 2.0) - (n / 2.0) * std::log(std::numbers::pi) -
                  std::lgamma(-s));
}

/// A_{N,alpha} = Gamma((N-alpha)/2) / (2^alpha pi^{N/2} Gamma(alpha/2))
inline double riesz_constant(int dim, double alpha) {
  const double n = dim;
  return std::exp(std::lgamma((n - alpha) / 2.0) - alpha * std::log(2.0) - (n / 2.0) * std::log(std::numbers::pi) -
                  std::lgamma(alpha / 2.0));
}

inline FracParams make_frac_params(int dim, double s, double alpha, double mu) {
  if (dim < 1 || dim > 3) throw InvalidParams("dimension must be 1, 2 or 3");
  if (!(s > 0.0 && s < 1.0)) throw InvalidParams("s must lie in (0,1), got " + num_str(s));
  if (!(alpha > 0.0 && alpha < dim))
    throw InvalidParams("alpha must lie in (0,N) = (0," + std::to_string(dim) + "), got " + std::to_string(alpha));
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidParams("mu must be positive, got " + num_str(mu));
  if (!(2.0 * s < dim)) throw InvalidParams("need 2s < N for a finite critical Sobolev exponent");
  FracParams p;
  p.dim = dim;
  p.s = s;
  p.alpha = alpha;
  p.mu = mu;
  p.c_ns = frac_laplacian_constant(dim, s);
  p.a_nalpha = riesz_constant(dim, alpha);
  p.two_star_s = 2.0 * dim / (dim - 2.0 * s);
  return p;
}

namespace detail {

inline std::vector<fft::Complex> to_complex(const Field& u) {
  std::vector<fft::Complex> c(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) c[i] = {u[i], 0.0};
  return c;
}

// Real part of an inverse transform; the imaginary residue must stay below
// 1e-10 of the reference magnitude.
inline std::vector<double> real_part(const std::vector<fft::Complex>& c, double reference) {
  std::vector<double> out(c.size());
  double leak = 0.0, peak = reference;
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = c[i].real();
    leak = std::max(leak, std::abs(c[i].imag()));
    peak = std::max(peak, std::abs(out[i]));
  }
  if (leak > 1e-10 * peak && leak > 0.0)
    throw SpectralLeak("imaginary residue " + num_str(leak) + " exceeds 1e-10 of max " + num_str(peak));
  return out;
}

inline Field apply_multiplier(const Field& u, const std::vector<double>& multiplier) {
  const GridSpec& g = u.grid();
  auto c = to_complex(u);
  fft::forward(c, g.dim, static_cast<int>(g.points_per_axis));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= multiplier[i];
  fft::inverse(c, g.dim, static_cast<int>(g.points_per_axis));
  return Field(g, real_part(c, u.max_abs()));
}

inline std::vector<double> power_multiplier(const GridSpec& g, double power) {
  auto lat = wavenumbers(g);
  for (double& m : lat.modulus) m = (m == 0.0) ? 0.0 : std::pow(m, 2.0 * power);
  return std::move(lat.modulus);
}

}  // namespace detail

/// F^{-1}(|xi|^{2 power} F u) for an arbitrary exponent power in (0,1].
inline Field frac_laplacian(const Field& u, double power) {
  if (!(power > 0.0 && power <= 1.0)) throw InvalidParams("fractional power must lie in (0,1]");
  return detail::apply_multiplier(u, detail::power_multiplier(u.grid(), power));
}

/// (-Delta)^power u with power restricted to {s, s/2} of the problem.
inline Field frac_laplacian(const Field& u, const FracParams& p, double power) {
  if (power != p.s && power != 0.5 * p.s) throw InvalidParams("power must be s or s/2");
  return frac_laplacian(u, power);
}

/// ||(-Delta)^{s/2} u||_2^2 for an arbitrary order s.
inline double gagliardo_seminorm_sq(const Field& u, double s) {
  const Field half = frac_laplacian(u, 0.5 * s);
  return inner(half, half);
}

inline double gagliardo_seminorm_sq(const Field& u, const FracParams& p) { return gagliardo_seminorm_sq(u, p.s); }

inline Field bessel_resolvent(const Field& rhs, double s, double mu) {
  auto m = detail::power_multiplier(rhs.grid(), s);
  for (double& v : m) v = 1.0 / (v + mu);
  return detail::apply_multiplier(rhs, m);
}

inline Field bessel_resolvent(const Field& rhs, const FracParams& p) { return bessel_resolvent(rhs, p.s, p.mu); }

// --------------------------------------------------------------------------
// Riesz potential

/// How the kernel value at x = 0 (where |x|^{alpha-N} is singular) is chosen.
///  CellAverage: average of the kernel over the grid cell around the origin.
///  LatticeSum:  the zeta-regularised weight -Z_N(N-alpha) of the square
///               lattice, which makes the punctured rectangle rule exact up
///               to O(h^{alpha+2}) for smooth integrands.
///  LatticeSumLaplacian: LatticeSum plus the next zeta term, applied through
///               the (2N+1)-point Laplacian stencil; O(h^{alpha+4}).
///  LatticeSumQuartic: one more term through fourth-difference stencils;
///               O(h^{alpha+6}).
enum class SingularCellRule { CellAverage, LatticeSum, LatticeSumLaplacian, LatticeSumQuartic };

/// Integral of |x|^{alpha-N} over the cube [-1/2,1/2]^N, by splitting the
/// cube into 2N pyramids and integrating radially along each:
/// 2N (1/2)^alpha / alpha * int_{[-1,1]^{N-1}} (1+|eta|^2)^{(alpha-N)/2}.
inline double unit_cell_kernel_integral(int dim, double alpha) {
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  const double expo = 0.5 * (alpha - dim);
  double face = 1.0;
  if (dim == 2) {
    face = Gauss::integrate([&](double e) { return std::pow(1.0 + e * e, expo); }, -1.0, 1.0);
  } else if (dim == 3) {
    face = Gauss::integrate(
        [&](double e1) {
          return Gauss::integrate([&](double e2) { return std::pow(1.0 + e1 * e1 + e2 * e2, expo); }, -1.0, 1.0);
        },
        -1.0, 1.0);
  }
  return 2.0 * dim * std::pow(0.5, alpha) / alpha * face;
}

namespace detail {
// Gamma(a, x) for any real a, x > 0; negative a by downward recurrence.
inline double upper_gamma(double a, double x) {
  if (a > 0.0) return boost::math::tgamma(a, x);
  if (a == 0.0) return boost::math::expint(1, x);
  const double frac = a - std::floor(a);
  double g = frac > 0.0 ? boost::math::tgamma(frac, x) : boost::math::expint(1, x);
  for (double b = frac - 1.0; b >= a - 1e-12; b -= 1.0) g = (g - std::pow(x, b) * std::exp(-x)) / b;
  return g;
}
}  // namespace detail

/// Analytic continuation of sum_{j in Z^N, j != 0} |j|^{-exponent} (Epstein
/// zeta of the square lattice) via the theta-function split at t = 1 with
/// upper incomplete gamma functions. Defined for every exponent except N.
inline double lattice_zeta(int dim, double exponent) {
  if (exponent == dim) throw DomainError("lattice zeta has a pole at exponent = N");
  if (exponent <= 0.0 && std::abs(exponent / 2.0 - std::round(exponent / 2.0)) < 1e-9) {
    // Z(0) = -1 and Z(-2k) = 0; the split formula is 0 * inf there.
    return std::round(exponent) == 0.0 ? -1.0 : 0.0;
  }
  const double a = 0.5 * exponent;
  const double b = 0.5 * (dim - exponent);
  double total = 2.0 / (exponent - dim) - 2.0 / exponent;
  const int reach = 7;
  const int lo = -reach, hi = reach;
  const int ylo = dim >= 2 ? lo : 0, yhi = dim >= 2 ? hi : 0;
  const int zlo = dim >= 3 ? lo : 0, zhi = dim >= 3 ? hi : 0;
  for (int i = lo; i <= hi; ++i)
    for (int j = ylo; j <= yhi; ++j)
      for (int k = zlo; k <= zhi; ++k) {
        const int r2 = i * i + j * j + k * k;
        if (r2 == 0) continue;
        const double x = std::numbers::pi * r2;
        total += std::pow(x, -a) * detail::upper_gamma(a, x) + std::pow(x, -b) * detail::upper_gamma(b, x);
      }
  return total * std::pow(std::numbers::pi, a) / boost::math::tgamma(a);
}

/// Square-lattice sum of the cubic harmonic Y(j) = sum_i j_i^4 - 3|j|^4/(N+2)
/// against |j|^{-exponent}; entire in the exponent (Hecke's theta identity).
inline double lattice_zeta_quartic_harmonic(int dim, double exponent) {
  const double a = 0.5 * exponent;
  const double b = 0.5 * dim + 4.0 - a;
  const double c = 3.0 / (dim + 2.0);
  double total = 0.0;
  const int reach = 7;
  const int ylo = dim >= 2 ? -reach : 0, yhi = dim >= 2 ? reach : 0;
  const int zlo = dim >= 3 ? -reach : 0, zhi = dim >= 3 ? reach : 0;
  for (int i = -reach; i <= reach; ++i)
    for (int j = ylo; j <= yhi; ++j)
      for (int k = zlo; k <= zhi; ++k) {
        const double r2 = i * i + j * j + k * k;
        if (r2 == 0.0) continue;
        const double y = std::pow(i, 4) + std::pow(j, 4) + std::pow(k, 4) - c * r2 * r2;
        if (y == 0.0) continue;
        const double x = std::numbers::pi * r2;
        total += y * (std::pow(x, -a) * detail::upper_gamma(a, x) + std::pow(x, -b) * detail::upper_gamma(b, x));
      }
  return total * std::pow(std::numbers::pi, a) / boost::math::tgamma(a);
}

/// Near-field weights of a rule, in units of A h^alpha: the weight at the
/// origin and the extra weights at the axis neighbours +-e_i, the second
/// axis neighbours +-2e_i and the diagonals +-e_i +-e_k.
struct NearFieldWeights {
  double center = 0.0;
  double axis1 = 0.0;
  double axis2 = 0.0;
  double diagonal = 0.0;
};

// With b = N - alpha, for smooth g
//   sum' h^N g(jh)|jh|^{-b} - int g|x|^{-b}
//     = h^alpha Z(b) g(0) + h^{alpha+2} Z(b-2)/(2N) Lap g(0)
//       + h^{alpha+4} [P/24 sum_i d_i^4 g(0) + Q/4 sum_{i<k} d_i^2 d_k^2 g(0)] + O(h^{alpha+6})
// with P = sum' j_1^4 |j|^{-b}, Q = sum' j_1^2 j_2^2 |j|^{-b} (zeta-regularised).
// Each correction is subtracted through a central-difference stencil.
inline NearFieldWeights near_field_weights(int dim, double alpha, SingularCellRule rule) {
  const double b = dim - alpha;
  NearFieldWeights w;
  switch (rule) {
    case SingularCellRule::CellAverage:
      w.center = unit_cell_kernel_integral(dim, alpha);
      return w;
    case SingularCellRule::LatticeSum:
      w.center = -lattice_zeta(dim, b);
      return w;
    case SingularCellRule::LatticeSumLaplacian:
    case SingularCellRule::LatticeSumQuartic:
      break;
  }
  const double z2 = lattice_zeta(dim, b - 2.0) / (2.0 * dim);
  w.center = -lattice_zeta(dim, b) + 2.0 * dim * z2;
  w.axis1 = -z2;
  if (rule == SingularCellRule::LatticeSumLaplacian) return w;

  const double z4 = lattice_zeta(dim, b - 4.0);
  double p4 = z4, q4 = 0.0;
  if (dim > 1) {
    p4 = (lattice_zeta_quartic_harmonic(dim, b) + 3.0 / (dim + 2.0) * z4) / dim;
    q4 = (z4 - dim * p4) / (dim * (dim - 1.0));
  }
  // the Laplacian stencil itself carries h^2/12 sum_i d_i^4
  const double a4 = p4 / 24.0 - z2 / 12.0;
  const double b4 = q4 / 4.0;
  const double pairs = 0.5 * dim * (dim - 1.0);
  w.center -= 6.0 * dim * a4 + 4.0 * pairs * b4;
  w.axis1 -= -4.0 * a4 - 2.0 * (dim - 1.0) * b4;
  w.axis2 = -a4;
  w.diagonal = -b4;
  return w;
}

/// Weight w such that h^N K(0) = A h^alpha w, for the chosen rule.
inline double singular_cell_weight(int dim, double alpha, SingularCellRule rule) {
  return near_field_weights(dim, alpha, rule).center;
}

/// Free-space convolution with A|x|^{alpha-N} on the box, evaluated by the
/// truncated-kernel method: the kernel (cut at R = 2L sqrt(N)) lives on a
/// grid zero-padded to 2n per axis, so the circular convolution equals the
/// free-space rectangle-rule sum at every grid point. The kernel spectrum is
/// computed once; apply() is const and allocates its own workspace.
class RieszOperator {
 public:
  RieszOperator(const GridSpec& g, double alpha, SingularCellRule rule = SingularCellRule::LatticeSumQuartic)
      : grid_(g), alpha_(alpha), rule_(rule) {
    if (!(alpha > 0.0 && alpha < g.dim)) throw InvalidParams("alpha must lie in (0,N)");
    const std::size_t n = g.points_per_axis;
    const std::size_t m = 2 * n;
    padded_total_ = 1;
    for (int d = 0; d < g.dim; ++d) padded_total_ *= m;
    const double amp = riesz_constant(g.dim, alpha);
    const double h = g.spacing;
    const double cutoff = 2.0 * g.half_length * std::sqrt(static_cast<double>(g.dim));
    const auto near = near_field_weights(g.dim, alpha, rule);
    center_value_ = amp * near.center * std::pow(h, alpha - g.dim);
    const double near_scale = amp * std::pow(h, alpha - g.dim);

    std::vector<fft::Complex> kernel(padded_total_);
    for (std::size_t flat = 0; flat < padded_total_; ++flat) {
      std::size_t rest = flat;
      double r2 = 0.0;
      int nonzero = 0;
      for (int d = g.dim - 1; d >= 0; --d) {
        const std::size_t idx = rest % m;
        rest /= m;
        const double off = idx < n ? static_cast<double>(idx) : static_cast<double>(idx) - static_cast<double>(m);
        r2 += off * off;
        nonzero += off != 0.0;
      }
      double k = 0.0;
      if (r2 == 0.0) {
        k = center_value_;
      } else {
        const double r = h * std::sqrt(r2);
        if (r <= cutoff) k = amp * std::pow(r, alpha - g.dim);
        if (r2 == 1.0) k += near_scale * near.axis1;
        if (r2 == 4.0 && nonzero == 1) k += near_scale * near.axis2;
        if (r2 == 2.0 && nonzero == 2) k += near_scale * near.diagonal;
      }
      kernel[flat] = {k * g.cell_volume(), 0.0};
    }
    fft::forward(kernel, g.dim, static_cast<int>(m));
    spectrum_.resize(padded_total_);
    // even kernel: spectrum is real up to rounding
    for (std::size_t i = 0; i < padded_total_; ++i) spectrum_[i] = kernel[i].real();
  }

  const GridSpec& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  SingularCellRule rule() const { return rule_; }
  double center_value() const { return center_value_; }

  Field apply(const Field& u, Warnings* warnings = nullptr) const {
    if (!(u.grid() == grid_)) throw InvalidGrid("Riesz operator built for a different grid");
    if (warnings && boundary_ratio(u) > kDefaultContaminationThreshold)
      warnings->push_back("BoundaryContamination: riesz_potential input does not decay in the outer shell");
    const std::size_t n = grid_.points_per_axis;
    const std::size_t m = 2 * n;
    std::vector<fft::Complex> work(padded_total_, fft::Complex{0.0, 0.0});
    for (std::size_t i = 0; i < u.size(); ++i) work[padded_index(i)] = {u[i], 0.0};
    fft::forward(work, grid_.dim, static_cast<int>(m));
    for (std::size_t i = 0; i < padded_total_; ++i) work[i] *= spectrum_[i];
    fft::inverse(work, grid_.dim, static_cast<int>(m));
    std::vector<double> out(u.size());
    double leak = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto& c = work[padded_index(i)];
      out[i] = c.real();
      peak = std::max(peak, std::abs(c.real()));
    }
    for (const auto& c : work) leak = std::max(leak, std::abs(c.imag()));
    if (leak > 1e-10 * peak && leak > 0.0) throw SpectralLeak("Riesz convolution left an imaginary residue");
    return Field(grid_, std::move(out));
  }

 private:
  std::size_t padded_index(std::size_t flat) const {
    const auto idx = unflatten(grid_, flat);
    const std::size_t m = 2 * grid_.points_per_axis;
    std::size_t p = 0;
    for (int d = 0; d < grid_.dim; ++d) p = p * m + idx[d];
    return p;
  }

  GridSpec grid_;
  double alpha_;
  SingularCellRule rule_;
  double center_value_ = 0.0;
  std::size_t padded_total_ = 0;
  std::vector<double> spectrum_;
};

inline Field riesz_potential(const Field& u, double alpha, Warnings* warnings = nullptr,
                             SingularCellRule rule = SingularCellRule::LatticeSumQuartic) {
  return RieszOperator(u.grid(), alpha, rule).apply(u, warnings);
}

inline Field riesz_potential(const Field& u, const FracParams& p, Warnings* warnings = nullptr) {
  if (p.dim != u.grid().dim) throw InvalidParams("parameter dimension does not match the grid");
  return riesz_potential(u, p.alpha, warnings);
}

}  // namespace fchq
