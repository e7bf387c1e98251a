#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fchq/nonlinearity.hpp"
#include "support.hpp"

using namespace fchq;
using fchq::test::rel_err;

namespace {

std::vector<NonlinearityModel> shipped() {
  return {pure_power(2.0), pure_power(2.5), double_power(2.0, 2.5, 1), double_power(2.5, 2.0, 1.0, -0.5),
          saturable(1.0), saturable(0.5)};
}

}  // namespace

TEST(Nonlinearity, PurePowerValues) {
  const auto m = pure_power(2.0);
  EXPECT_DOUBLE_EQ(eval_F(m, 3.0), 4.5);
  EXPECT_DOUBLE_EQ(eval_f(m, 3.0), 3.0);
  const auto m3 = pure_power(3.0);
  EXPECT_DOUBLE_EQ(eval_F(m3, -2.0), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(eval_f(m3, -2.0), -4.0);
}

TEST(Nonlinearity, ZeroAtOrigin) {
  for (const auto& m : shipped()) {
    EXPECT_EQ(eval_F(m, 0.0), 0.0) << m.describe();
    EXPECT_EQ(eval_f(m, 0.0), 0.0) << m.describe();
  }
}

TEST(Nonlinearity, SaturableAgainstQuadrature) {
  const auto m = saturable(1.0);
  EXPECT_DOUBLE_EQ(eval_f(m, 1.0), 0.5);
  for (double t : {1e-3, 0.1, 1.0, 3.0, -2.0}) {
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double x) { return x * x * x / (1.0 + x * x); }, 0.0, std::abs(t), 15, 1e-14);
    EXPECT_NEAR(eval_F(m, t), q, 1e-10 * std::max(q, 1e-300) + 1e-300) << "t = " << t;
  }
}

TEST(Nonlinearity, FIsAntiderivativeOfF) {
  for (const auto& m : shipped()) {
    for (int k = -40; k <= 40; ++k) {
      const double t = 0.25 * k;
      if (t == 0.0) continue;
      const double e = 1e-5 * std::max(1.0, std::abs(t));
      const double fd = (eval_F(m, t + e) - eval_F(m, t - e)) / (2.0 * e);
      // f can vanish at interior points for the competing model; measure against |F(t)/t| there
      const double ref = std::max(std::abs(eval_f(m, t)), std::abs(eval_F(m, t) / t));
      EXPECT_LT(std::abs(fd - eval_f(m, t)), 1e-6 * ref) << m.describe() << " t = " << t;
    }
  }
}

TEST(Nonlinearity, IncrementMatchesDifference) {
  const auto m = saturable(1.0);
  for (double t : {0.3, 1.0, -2.0})
    for (double dt : {1e-3, 0.5, -0.7})
      EXPECT_NEAR(eval_F_increment(m, t, dt), eval_F(m, t + dt) - eval_F(m, t), 1e-13);
  EXPECT_EQ(eval_F_increment(m, 1.0, 0.0), 0.0);
}

TEST(Nonlinearity, PurePowerIsEven) {
  for (double r : {2.0, 2.7, 3.0})
    for (double t : {0.1, 1.3, 7.0}) {
      const auto m = pure_power(r);
      EXPECT_EQ(eval_F(m, -t), eval_F(m, t));
      EXPECT_EQ(eval_f(m, -t), -eval_f(m, t));
    }
}

TEST(Nonlinearity, OverflowBeyondSafeRange) {
  const auto m = pure_power(2.0);
  EXPECT_THROW(eval_F(m, 1e200), Overflow);
  EXPECT_THROW(eval_f(m, -1e200), Overflow);
  EXPECT_THROW(eval_F(m, NAN), Overflow);
  EXPECT_NO_THROW(eval_F(m, 1e100));
}

TEST(Nonlinearity, ConstructorsValidate) {
  EXPECT_THROW(pure_power(1.0), InvalidParams);
  EXPECT_THROW(double_power(2.0, 0.5, 1), InvalidParams);
  EXPECT_THROW(double_power(2.0, 3.0, 0.0, 1.0), InvalidParams);
  EXPECT_THROW(saturable(0.0), InvalidParams);
}

TEST(Growth, DefaultModelInsideWindow) {
  const auto p = make_frac_params(2, 0.5, 1.0, 1.0);
  const auto rep = check_growth(pure_power(2.0), p);
  EXPECT_DOUBLE_EQ(rep.window_lower, 1.5);
  EXPECT_DOUBLE_EQ(rep.window_upper, 3.0);
  EXPECT_EQ(rep.f1, Verdict::Holds);
  EXPECT_TRUE(rep.f2());
  EXPECT_TRUE(rep.f3());
  EXPECT_EQ(rep.f4, Verdict::Holds);
  EXPECT_EQ(rep.f5, Verdict::Holds);
  EXPECT_TRUE(rep.existence_hypotheses());
}

TEST(Growth, OutsideWindow) {
  const auto p = make_frac_params(2, 0.5, 1.0, 1.0);
  const auto low = check_growth(pure_power(1.2), p);
  EXPECT_EQ(low.f3_zero, Verdict::Fails);
  EXPECT_EQ(low.f5, Verdict::Fails);
  const auto high = check_growth(pure_power(3.5), p);
  EXPECT_EQ(high.f3_infinity, Verdict::Fails);
  EXPECT_EQ(high.f2_infinity, Verdict::Fails);
  EXPECT_EQ(high.f3_zero, Verdict::Holds);
}

TEST(Growth, CriticalExponentsAreReportedAsCritical) {
  const auto p = make_frac_params(2, 0.5, 1.0, 1.0);
  const auto lower = check_growth(pure_power(1.5), p);
  EXPECT_EQ(lower.f3_zero, Verdict::Critical);
  EXPECT_EQ(lower.f2_zero, Verdict::Holds);
  const auto upper = check_growth(pure_power(3.0), p);
  EXPECT_EQ(upper.f3_infinity, Verdict::Critical);
  EXPECT_EQ(upper.f2_infinity, Verdict::Holds);
}

TEST(Growth, UndeclaredExponents) {
  auto m = pure_power(2.0);
  m.exponent_at_infinity = std::nan("");
  EXPECT_THROW(check_growth(m, make_frac_params(2, 0.5, 1.0, 1.0)), UnknownModel);
}

TEST(Growth, SaturableAndCompetingPowers) {
  const auto p = make_frac_params(2, 0.5, 1.0, 1.0);
  const auto sat = check_growth(saturable(), p);
  EXPECT_TRUE(sat.existence_hypotheses());
  EXPECT_EQ(sat.f5, Verdict::Holds);
  // F = t^2/2 - t^2.5/2.5 is positive near 0 only
  const auto comp = double_power(2.0, 2.5, -1);
  const auto rep = check_growth(comp, p);
  EXPECT_EQ(rep.f4, Verdict::Holds);
  ASSERT_TRUE(positive_point(comp).has_value());
  EXPECT_GT(eval_F(comp, *positive_point(comp)), 0.0);
  // negative everywhere: no positive point
  EXPECT_FALSE(positive_point(double_power(2.0, 3.0, -1.0, -1.0)).has_value());
}

TEST(Growth, SampledLimitsCorroborateDeclaredExponents) {
  const auto p = make_frac_params(2, 0.5, 1.0, 1.0);
  for (const auto& m : {pure_power(2.0), pure_power(2.5), saturable(1.0), double_power(2.0, 2.5, 1)}) {
    const auto rep = check_growth(m, p);
    ASSERT_TRUE(rep.f3()) << m.describe();
    double prev = INFINITY;
    for (int k = 1; k <= 6; ++k) {
      const double t = std::pow(10.0, -k);
      const double q = eval_F(m, t) / std::pow(t, rep.window_lower);
      EXPECT_LT(q, prev) << m.describe() << " at t = " << t;
      prev = q;
    }
    EXPECT_LT(prev, 1e-2);
    prev = INFINITY;
    for (int k = 1; k <= 6; ++k) {
      const double t = std::pow(10.0, k);
      const double q = eval_F(m, t) / std::pow(t, rep.window_upper);
      EXPECT_LT(q, prev) << m.describe() << " at t = " << t;
      prev = q;
    }
    EXPECT_LT(prev, 1e-2);
  }
}
