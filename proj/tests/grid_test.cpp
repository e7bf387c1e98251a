#include <gtest/gtest.h>

#include <numbers>

#include "fchq/grid.hpp"
#include "support.hpp"

using namespace fchq;
using fchq::test::gaussian;

TEST(MakeGrid, SpacingIsTwoLOverN) {
  EXPECT_DOUBLE_EQ(make_grid(2, 16.0, 256).spacing, 0.125);
  EXPECT_DOUBLE_EQ(make_grid(1, 8.0, 8).spacing, 2.0);
  EXPECT_EQ(make_grid(3, 4.0, 16).total_points(), 4096u);
}

TEST(MakeGrid, RejectsBadShapes) {
  EXPECT_THROW(make_grid(2, 16.0, 255), InvalidGrid);
  EXPECT_THROW(make_grid(2, 16.0, 6), InvalidGrid);
  EXPECT_THROW(make_grid(0, 16.0, 64), InvalidGrid);
  EXPECT_THROW(make_grid(4, 16.0, 64), InvalidGrid);
  EXPECT_THROW(make_grid(2, 0.0, 64), InvalidGrid);
  EXPECT_THROW(make_grid(2, -1.0, 64), InvalidGrid);
  EXPECT_THROW(make_grid(2, INFINITY, 64), InvalidGrid);
  EXPECT_THROW(make_grid(3, 1.0, std::size_t{1} << 24), InvalidGrid);
}

TEST(Field, RejectsNonFiniteAndWrongSize) {
  const auto g = make_grid(1, 1.0, 8);
  std::vector<double> v(8, 0.0);
  v[3] = NAN;
  EXPECT_THROW(Field(g, v), NonFinite);
  v[3] = INFINITY;
  EXPECT_THROW(Field(g, v), NonFinite);
  EXPECT_THROW(Field(g, std::vector<double>(7, 0.0)), InvalidGrid);
}

TEST(Field, RowMajorLayout) {
  const auto g = make_grid(2, 1.0, 8);
  // last axis varies fastest
  EXPECT_EQ(flatten(g, {1, 2, 0}), 1u * 8u + 2u);
  const auto idx = unflatten(g, 19);
  EXPECT_EQ(idx[0], 2u);
  EXPECT_EQ(idx[1], 3u);
  const auto x = position(g, 19);
  EXPECT_DOUBLE_EQ(x[0], -1.0 + 2 * 0.25);
  EXPECT_DOUBLE_EQ(x[1], -1.0 + 3 * 0.25);
}

TEST(Integrate, ZeroAndConstant) {
  for (int dim : {1, 2, 3}) {
    const auto g = make_grid(dim, 3.0, 16);
    EXPECT_EQ(integrate(Field::zeros(g)), 0.0);
    const Field one = Field::sample(g, [](const auto&) { return 1.0; });
    EXPECT_NEAR(integrate(one), std::pow(6.0, dim), 1e-12 * std::pow(6.0, dim));
  }
}

TEST(Integrate, GaussianIsPi) {
  const auto g = make_grid(2, 16.0, 128);
  const Field f = Field::sample(g, [](const auto& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); });
  EXPECT_NEAR(integrate(f), std::numbers::pi, 1e-10);
}

TEST(Integrate, Linear) {
  const auto g = make_grid(2, 8.0, 64);
  const Field f = gaussian(g, 1.0, {0.5, -1.0, 0.0});
  const Field h = gaussian(g, 0.7, {-2.0, 1.0, 0.0});
  const double a = 2.5, b = -0.75;
  const double lhs = integrate(combine(a, f, b, h));
  const double rhs = a * integrate(f) + b * integrate(h);
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));
}

TEST(Integrate, InvariantUnderBoxDoublingAtFixedSpacing) {
  const auto small = make_grid(2, 8.0, 64);
  const auto large = make_grid(2, 16.0, 128);
  const double a = integrate(gaussian(small, 1.0, {0.3, -0.2, 0.0}));
  const double b = integrate(gaussian(large, 1.0, {0.3, -0.2, 0.0}));
  EXPECT_LT(fchq::test::rel_err(a, b), 1e-8);
}

TEST(Wavenumbers, AxisFrequenciesWithLEqualPi) {
  const auto g = make_grid(1, std::numbers::pi, 8);
  const auto lat = wavenumbers(g);
  const std::vector<double> expected{0, 1, 2, 3, -4, -3, -2, -1};
  ASSERT_EQ(lat.axis.size(), expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(lat.axis[j], expected[j], 1e-14);
}

TEST(Wavenumbers, ZeroModeOnceAndNyquist) {
  const auto g = make_grid(2, 5.0, 32);
  const auto lat = wavenumbers(g);
  EXPECT_EQ(std::count(lat.axis.begin(), lat.axis.end(), 0.0), 1);
  double top = 0.0;
  for (double k : lat.axis) top = std::max(top, std::abs(k));
  EXPECT_DOUBLE_EQ(top, std::numbers::pi * 32 / (2 * 5.0));
  EXPECT_EQ(std::count(lat.modulus.begin(), lat.modulus.end(), 0.0), 1);
  EXPECT_NEAR(lat.modulus[flatten(g, {3, 4, 0})], std::hypot(lat.axis[3], lat.axis[4]), 1e-14);
}

TEST(BoundaryRatio, SeparatesDecayedFromWideFields) {
  const auto g = make_grid(2, 8.0, 64);
  EXPECT_EQ(boundary_ratio(Field::zeros(g)), 0.0);
  EXPECT_LT(boundary_ratio(gaussian(g, 0.8)), kDefaultContaminationThreshold);
  EXPECT_GT(boundary_ratio(gaussian(g, 4.0)), 0.1);
}
