#pragma once

// Uniform tensor grids on the truncated box [-L, L)^N, the Field value type
// and the rectangle-rule quadrature shared by all operators.
//
// Layout: grid point j along an axis sits at x_j = -L + j*h, so x = 0 is
// index n/2. Fields are stored row-major with axis 0 slowest.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fchq/error.hpp"

namespace fchq {

struct GridSpec {
  int dim = 0;
  double half_length = 0.0;
  std::size_t points_per_axis = 0;
  double spacing = 0.0;

  std::size_t total_points() const {
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= points_per_axis;
    return total;
  }
  double cell_volume() const { return std::pow(spacing, dim); }
  double coordinate(std::size_t j) const {
    return -half_length + static_cast<double>(j) * spacing;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec make_grid(int dim, double half_length, std::size_t points_per_axis) {
  if (dim < 1 || dim > 3) throw InvalidGrid("dimension must be 1, 2 or 3, got " + std::to_string(dim));
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw InvalidGrid("half_length must be positive and finite");
  if (points_per_axis < 8 || points_per_axis % 2 != 0)
    throw InvalidGrid("points_per_axis must be even and >= 8, got " + std::to_string(points_per_axis));
  // n^N must be addressable, with headroom for the 2x padded Riesz grid
  const double padded = std::pow(2.0 * static_cast<double>(points_per_axis), dim);
  if (padded > static_cast<double>(std::numeric_limits<std::ptrdiff_t>::max() / 16))
    throw InvalidGrid("grid too large for this platform");
  GridSpec g;
  g.dim = dim;
  g.half_length = half_length;
  g.points_per_axis = points_per_axis;
  g.spacing = 2.0 * half_length / static_cast<double>(points_per_axis);
  return g;
}

/// Multi-index of a flat row-major index.
inline std::array<std::size_t, 3> unflatten(const GridSpec& g, std::size_t flat) {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int d = g.dim - 1; d >= 0; --d) {
    idx[d] = flat % g.points_per_axis;
    flat /= g.points_per_axis;
  }
  return idx;
}

inline std::size_t flatten(const GridSpec& g, const std::array<std::size_t, 3>& idx) {
  std::size_t flat = 0;
  for (int d = 0; d < g.dim; ++d) flat = flat * g.points_per_axis + idx[d];
  return flat;
}

inline std::array<double, 3> position(const GridSpec& g, std::size_t flat) {
  const auto idx = unflatten(g, flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = 0; d < g.dim; ++d) x[d] = g.coordinate(idx[d]);
  return x;
}

inline double radius(const GridSpec& g, std::size_t flat) {
  const auto x = position(g, flat);
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

/// A real scalar function sampled on a grid. Immutable once built; every
/// constructor rejects non-finite samples.
class Field {
 public:
  Field() = default;
  Field(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.total_points())
      throw InvalidGrid("field has " + std::to_string(values_.size()) + " values, grid needs " +
                        std::to_string(grid_.total_points()));
    for (double v : values_)
      if (!std::isfinite(v)) throw NonFinite("field contains NaN or Inf");
  }

  static Field zeros(const GridSpec& g) { return Field(g, std::vector<double>(g.total_points(), 0.0)); }

  /// Samples fn(x) with x an std::array<double,3> (unused axes are 0).
  template <typename Fn>
  static Field sample(const GridSpec& g, Fn&& fn) {
    std::vector<double> v(g.total_points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(position(g, i));
    return Field(g, std::move(v));
  }

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  double min_value() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }

  /// Pointwise map, returns a new field.
  template <typename Fn>
  Field map(Fn&& fn) const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(values_[i]);
    return Field(grid_, std::move(v));
  }

 private:
  GridSpec grid_{};
  std::vector<double> values_;
};

inline void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw InvalidGrid("fields live on different grids");
}

/// a*x + b*y
inline Field combine(double a, const Field& x, double b, const Field& y) {
  require_same_grid(x, y);
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x[i] + b * y[i];
  return Field(x.grid(), std::move(v));
}

inline Field scale(double a, const Field& x) { return x.map([a](double v) { return a * v; }); }

inline Field multiply(const Field& x, const Field& y) {
  require_same_grid(x, y);
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] * y[i];
  return Field(x.grid(), std::move(v));
}

namespace detail {
// Neumaier-compensated sum; J differences near convergence sit close to
// the rounding floor of a plain sum over n^N terms.
template <typename Range>
double compensated_sum(const Range& r) {
  double sum = 0.0, c = 0.0;
  for (double v : r) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  return sum + c;
}
}  // namespace detail

/// h^N * sum of samples (rectangle rule = trapezoid under periodic extension).
inline double integrate(const Field& f) { return f.grid().cell_volume() * detail::compensated_sum(f.values()); }

/// integrate(f*g) without materialising the product.
inline double inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  double sum = 0.0, c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f[i] * g[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  return f.grid().cell_volume() * (sum + c);
}

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

/// Discrete frequency lattice xi_k = pi k / L, k in {-n/2, ..., n/2-1},
/// stored in FFT order (k = 0, 1, ..., n/2-1, -n/2, ..., -1).
struct FrequencyLattice {
  std::vector<double> axis;     // per-axis frequencies, FFT order
  std::vector<double> modulus;  // |xi| per lattice point, row-major FFT order
};

inline double axis_frequency(const GridSpec& g, std::size_t j) {
  const auto n = static_cast<std::ptrdiff_t>(g.points_per_axis);
  const auto k = static_cast<std::ptrdiff_t>(j) < n / 2 ? static_cast<std::ptrdiff_t>(j)
                                                         : static_cast<std::ptrdiff_t>(j) - n;
  return std::numbers::pi * static_cast<double>(k) / g.half_length;
}

inline FrequencyLattice wavenumbers(const GridSpec& g) {
  FrequencyLattice lat;
  lat.axis.resize(g.points_per_axis);
  for (std::size_t j = 0; j < g.points_per_axis; ++j) lat.axis[j] = axis_frequency(g, j);
  lat.modulus.resize(g.total_points());
  for (std::size_t i = 0; i < lat.modulus.size(); ++i) {
    const auto idx = unflatten(g, i);
    double sq = 0.0;
    for (int d = 0; d < g.dim; ++d) sq += lat.axis[idx[d]] * lat.axis[idx[d]];
    lat.modulus[i] = std::sqrt(sq);
  }
  return lat;
}

/// Largest |f| on the outer shell (points with some |x_d| >= (1-fraction)L)
/// relative to max |f|. Zero for the zero field.
inline double boundary_ratio(const Field& f, double shell_fraction = 0.1) {
  const double peak = f.max_abs();
  if (peak == 0.0) return 0.0;
  const GridSpec& g = f.grid();
  const double cut = (1.0 - shell_fraction) * g.half_length;
  double edge = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = position(g, i);
    bool in_shell = false;
    for (int d = 0; d < g.dim; ++d) in_shell = in_shell || std::abs(x[d]) >= cut - 1e-12 * g.half_length;
    if (in_shell) edge = std::max(edge, std::abs(f[i]));
  }
  return edge / peak;
}

inline constexpr double kDefaultContaminationThreshold = 1e-8;

}  // namespace fchq
