#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "fchq/functionals.hpp"
#include "fchq/grid.hpp"
#include "fchq/nonlinearity.hpp"
#include "fchq/spectral_ops.hpp"

namespace fchq::test {

inline const FracParams& default_params() {
  static const FracParams p = make_frac_params(2, 0.5, 1.0, 1.0);
  return p;
}

inline const NonlinearityModel& default_model() {
  static const NonlinearityModel m = pure_power(2.0);
  return m;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline Field gaussian(const GridSpec& g, double width, std::array<double, 3> c = {0.0, 0.0, 0.0}, double amp = 1.0) {
  return Field::sample(g, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
    return amp * std::exp(-0.5 * r2 / (width * width));
  });
}

}  // namespace fchq::test
