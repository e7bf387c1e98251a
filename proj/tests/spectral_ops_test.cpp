#include <gtest/gtest.h>

#include <numbers>

#include "fchq/ground_state.hpp"
#include "fchq/oracle.hpp"
#include "fchq/spectral_ops.hpp"
#include "support.hpp"

using namespace fchq;
using fchq::test::gaussian;
using fchq::test::max_abs_diff;
using fchq::test::rel_err;

namespace {

Field plane_wave(const GridSpec& g, const std::array<int, 3>& k, double amp = 1.0) {
  return Field::sample(g, [&](const auto& x) {
    double ph = 0.0;
    for (int d = 0; d < g.dim; ++d) ph += std::numbers::pi * k[d] / g.half_length * x[d];
    return amp * std::cos(ph);
  });
}

double wave_modulus(const GridSpec& g, const std::array<int, 3>& k) {
  double sq = 0.0;
  for (int d = 0; d < g.dim; ++d) sq += std::pow(std::numbers::pi * k[d] / g.half_length, 2);
  return std::sqrt(sq);
}

}  // namespace

TEST(FracParams, Constants) {
  EXPECT_NEAR(frac_laplacian_constant(1, 0.5), 1.0 / std::numbers::pi, 1e-14);
  EXPECT_NEAR(riesz_constant(3, 2.0), 1.0 / (4.0 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(riesz_constant(2, 1.0), 1.0 / (2.0 * std::numbers::pi), 1e-14);
  const auto p = make_frac_params(2, 0.5, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(p.two_star_s, 4.0);
  EXPECT_GT(p.c_ns, 0.0);
  EXPECT_GT(p.a_nalpha, 0.0);
  // C_{N,s} against the tgamma form
  for (double s : {0.2, 0.5, 0.9}) {
    const double direct = std::pow(4.0, s) * std::tgamma(1.0 + s) / (std::numbers::pi * std::abs(std::tgamma(-s)));
    EXPECT_NEAR(frac_laplacian_constant(2, s), direct, 1e-12 * direct);
  }
}

TEST(FracParams, Validation) {
  EXPECT_THROW(make_frac_params(2, 0.0, 1.0, 1.0), InvalidParams);
  EXPECT_THROW(make_frac_params(2, 1.0, 1.0, 1.0), InvalidParams);
  EXPECT_THROW(make_frac_params(2, 0.5, 2.0, 1.0), InvalidParams);
  EXPECT_THROW(make_frac_params(2, 0.5, 0.0, 1.0), InvalidParams);
  EXPECT_THROW(make_frac_params(2, 0.5, 1.0, 0.0), InvalidParams);
  EXPECT_THROW(make_frac_params(1, 0.6, 0.5, 1.0), InvalidParams);
  EXPECT_THROW(make_frac_params(4, 0.5, 1.0, 1.0), InvalidParams);
}

TEST(FracLaplacian, PlaneWaveEigenfunction) {
  const auto g = make_grid(2, 4.0, 32);
  const auto p = make_frac_params(2, 0.3, 1.0, 1.0);
  const std::array<int, 3> k{3, -2, 0};
  const Field u = plane_wave(g, k);
  const double lam = std::pow(wave_modulus(g, k), 2.0 * p.s);
  EXPECT_LT(max_abs_diff(frac_laplacian(u, p, p.s), scale(lam, u)), 1e-12 * lam);
  const double lam_half = std::pow(wave_modulus(g, k), p.s);
  EXPECT_LT(max_abs_diff(frac_laplacian(u, p, 0.5 * p.s), scale(lam_half, u)), 1e-12 * lam_half);
}

TEST(FracLaplacian, ConstantIsAnnihilated) {
  const auto g = make_grid(3, 2.0, 8);
  const Field c = Field::sample(g, [](const auto&) { return 2.5; });
  EXPECT_LT(frac_laplacian(c, 0.4).max_abs(), 1e-14);
}

TEST(FracLaplacian, PowerMustBeSOrHalfS) {
  const auto g = make_grid(1, 2.0, 16);
  const auto p = make_frac_params(1, 0.4, 0.5, 1.0);
  EXPECT_THROW(frac_laplacian(Field::zeros(g), p, 0.3), InvalidParams);
  EXPECT_THROW(frac_laplacian(Field::zeros(g), 1.5), InvalidParams);
}

TEST(FracLaplacian, GaussianMatchesSingularIntegral) {
  const auto g = make_grid(1, 8.0, 256);
  const Field u = gaussian(g, 1.0);
  const Field spectral = frac_laplacian(u, 0.5);
  const Field direct = oracle::direct_frac_laplacian(u, 0.5, {.max_points = 256});
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::abs(position(g, i)[0]) > 4.0) continue;
    EXPECT_LT(std::abs(spectral[i] - direct[i]) / spectral.max_abs(), 1e-6) << "at " << position(g, i)[0];
  }
}

TEST(FracLaplacian, NearOneAgreesWithLaplacian) {
  const auto g = make_grid(2, 8.0, 64);
  const Field u = gaussian(g, 1.0, {0.5, 0.0, 0.0});
  const Field a = frac_laplacian(u, 0.999);
  const Field b = frac_laplacian(u, 1.0);
  EXPECT_LT(max_abs_diff(a, b) / b.max_abs(), 0.01);
}

TEST(FracLaplacian, SymmetricPairing) {
  const auto g = make_grid(2, 8.0, 64);
  const double s = 0.5;
  const Field u = gaussian(g, 1.0, {0.5, -0.5, 0.0});
  const Field v = gaussian(g, 0.8, {-1.0, 0.3, 0.0}, -0.7);
  const double lhs = inner(frac_laplacian(u, 0.5 * s), frac_laplacian(v, 0.5 * s));
  const double rhs = inner(u, frac_laplacian(v, s));
  EXPECT_LT(rel_err(lhs, rhs), 1e-8);
}

TEST(Gagliardo, ZeroAndPlaneWave) {
  const auto g = make_grid(2, 4.0, 32);
  EXPECT_EQ(gagliardo_seminorm_sq(Field::zeros(g), 0.5), 0.0);
  const std::array<int, 3> k{2, 1, 0};
  const double a = 1.7, s = 0.35;
  const double expected = a * a * std::pow(wave_modulus(g, k), 2.0 * s) * std::pow(8.0, 2) / 2.0;
  EXPECT_LT(rel_err(gagliardo_seminorm_sq(plane_wave(g, k, a), s), expected), 1e-12);
}

TEST(Gagliardo, RatioToDoubleIntegralIsConstant) {
  const auto g = make_grid(1, 8.0, 256);
  const double s = 0.3;
  double lo = INFINITY, hi = 0.0;
  for (double w : {0.6, 0.8, 1.0, 1.2, 1.5}) {
    const Field u = gaussian(g, w);
    const double r = gagliardo_seminorm_sq(u, s) / oracle::gagliardo_double_integral(u, s, {.max_points = 256});
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_LT(hi / lo - 1.0, 1e-4);
  // the measured constant is C_{1,s}/2
  EXPECT_NEAR(lo, 0.5 * frac_laplacian_constant(1, s), 1e-6);
}

TEST(Riesz, DiscreteDeltaGivesKernel) {
  const auto g = make_grid(2, 8.0, 64);
  const double h = g.spacing;
  const std::size_t center = flatten(g, {32, 32, 0});
  std::vector<double> v(g.total_points(), 0.0);
  v[center] = 1.0 / (h * h);
  const Field pot = riesz_potential(Field(g, v), 1.0);
  const double A = riesz_constant(2, 1.0);
  for (std::size_t i = 0; i < pot.size(); ++i) {
    const double r = radius(g, i);
    if (r < 5.0 * h) continue;
    EXPECT_LT(rel_err(pot[i], A / r), 1e-3);
  }
}

TEST(Riesz, GaussianAtOriginMatchesClosedForm) {
  // (I_1 * e^{-|x|^2/2})(0) = A_{2,1} 2 pi int_0^inf e^{-r^2/2} dr = A sqrt(2) pi^{3/2}
  const double exact = riesz_constant(2, 1.0) * std::sqrt(2.0) * std::pow(std::numbers::pi, 1.5);
  double prev = INFINITY;
  for (std::size_t n : {32, 64, 128}) {
    const auto g = make_grid(2, 8.0, n);
    const Field pot = riesz_potential(gaussian(g, 1.0), 1.0);
    const double err = rel_err(pot[flatten(g, {n / 2, n / 2, 0})], exact);
    EXPECT_LT(err, prev / 8.0) << "n = " << n;
    prev = err;
  }
  EXPECT_LT(prev, 1e-7);
}

TEST(Riesz, Linear) {
  const auto g = make_grid(2, 8.0, 32);
  const Field u = gaussian(g, 1.0, {1.0, 0.0, 0.0});
  const Field v = gaussian(g, 0.7, {-1.0, 1.0, 0.0});
  const double a = 1.3, b = -2.1;
  const Field lhs = riesz_potential(combine(a, u, b, v), 1.0);
  const Field rhs = combine(a, riesz_potential(u, 1.0), b, riesz_potential(v, 1.0));
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12 * rhs.max_abs());
}

TEST(Riesz, NonnegativeInputGivesNonnegativeOutput) {
  const auto g = make_grid(2, 8.0, 64);
  const Field u = combine(1.0, gaussian(g, 0.5, {1.0, 1.0, 0.0}), 0.5, gaussian(g, 1.2, {-2.0, 0.0, 0.0}));
  const Field pot = riesz_potential(u, 1.0);
  EXPECT_GE(pot.min_value(), 0.0);
}

TEST(Riesz, CornerValueBoundedByKernelDecay) {
  const auto g = make_grid(2, 8.0, 64);
  const double rho = 2.0;
  const Field u = radial_bump(g, 1.0, rho);
  const Field pot = riesz_potential(u, 1.0);
  const double mass = integrate(u);
  const double A = riesz_constant(2, 1.0);
  for (std::array<std::size_t, 3> corner : {std::array<std::size_t, 3>{0, 0, 0}, {0, 63, 0}, {63, 0, 0}, {63, 63, 0}}) {
    const std::size_t i = flatten(g, corner);
    const double dist = radius(g, i) - rho;
    EXPECT_LE(pot[i], mass * A / dist);
    EXPECT_GT(pot[i], 0.0);
  }
}

TEST(Riesz, WarnsOnUndecayedInput) {
  const auto g = make_grid(2, 4.0, 32);
  Warnings w;
  riesz_potential(gaussian(g, 3.0), 1.0, &w);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("BoundaryContamination"), std::string::npos);
  Warnings none;
  riesz_potential(gaussian(g, 0.3), 1.0, &none);
  EXPECT_TRUE(none.empty());
}

TEST(Riesz, OperatorChecksGridAndAlpha) {
  const auto g = make_grid(2, 4.0, 32);
  EXPECT_THROW(RieszOperator(g, 2.0), InvalidParams);
  const RieszOperator op(g, 1.0);
  EXPECT_THROW(op.apply(Field::zeros(make_grid(2, 4.0, 16))), InvalidGrid);
}

TEST(Resolvent, ConstantPlaneWaveAndRoundTrip) {
  const auto g = make_grid(2, 4.0, 32);
  const double s = 0.5, mu = 1.7;
  const Field c = Field::sample(g, [](const auto&) { return 3.0; });
  EXPECT_LT(max_abs_diff(bessel_resolvent(c, s, mu), scale(1.0 / mu, c)), 1e-14);

  const std::array<int, 3> k{1, 4, 0};
  const Field w = plane_wave(g, k);
  const double factor = 1.0 / (std::pow(wave_modulus(g, k), 2.0 * s) + mu);
  EXPECT_LT(max_abs_diff(bessel_resolvent(w, s, mu), scale(factor, w)), 1e-14);

  const Field rhs = combine(1.0, gaussian(g, 0.6, {0.4, 0.0, 0.0}), -0.5, gaussian(g, 0.9, {-1.0, 0.7, 0.0}));
  const Field sol = bessel_resolvent(rhs, s, mu);
  const Field back = combine(1.0, frac_laplacian(sol, s), mu, sol);
  EXPECT_LT(max_abs_diff(back, rhs), 1e-11 * rhs.max_abs());
}
