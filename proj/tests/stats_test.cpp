#include "core/stats.hpp"

#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "core/rng.hpp"

namespace authdrift::stats {
namespace {

TEST(IncompleteBetaTest, MatchesBoost) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double a = 0.05 + 60.0 * rng.Uniform01();
    const double b = 0.05 + 60.0 * rng.Uniform01();
    const double x = rng.Uniform01();
    EXPECT_NEAR(RegularizedIncompleteBeta(a, b, x), boost::math::ibeta(a, b, x), 1e-10)
        << "a=" << a << " b=" << b << " x=" << x;
  }
}

TEST(IncompleteBetaTest, Endpoints) {
  EXPECT_EQ(RegularizedIncompleteBeta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(RegularizedIncompleteBeta(2.0, 3.0, 1.0), 1.0);
  EXPECT_NEAR(RegularizedIncompleteBeta(1.0, 1.0, 0.3), 0.3, 1e-14);
}

TEST(StudentTTest, MatchesBoost) {
  for (double dof : {1.0, 2.0, 3.0, 5.0, 10.0, 30.0, 200.0}) {
    const boost::math::students_t dist(dof);
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 3.5, -2.0, 8.0}) {
      const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
      EXPECT_NEAR(StudentTTwoTailed(t, dof), expected, 1e-10) << "t=" << t << " dof=" << dof;
    }
  }
}

TEST(ChiSquareTest, MatchesBoost) {
  const boost::math::chi_squared dist(1.0);
  for (double x : {0.0, 1e-6, 0.01, 0.5, 1.0, 3.841458820694124, 9.025, 25.0, 60.0}) {
    EXPECT_NEAR(ChiSquare1Survival(x), boost::math::cdf(boost::math::complement(dist, x)), 1e-10)
        << "x=" << x;
  }
  EXPECT_NEAR(ChiSquare1Survival(3.841458820694124), 0.05, 1e-12);
}

TEST(BinomialTest, MatchesBoostAndSumsDirectly) {
  for (std::uint64_t n = 1; n <= 60; ++n) {
    const boost::math::binomial dist(static_cast<double>(n), 0.5);
    for (std::uint64_t k = 0; k <= n; ++k) {
      const double tail = boost::math::cdf(dist, static_cast<double>(std::min(k, n - k)));
      EXPECT_NEAR(BinomialTwoTailedHalf(k, n), std::min(1.0, 2.0 * tail), 1e-10);
    }
  }
  // 2 * (1 + 10 + 45) / 1024
  EXPECT_NEAR(BinomialTwoTailedHalf(2, 10), 0.109375, 1e-15);
  EXPECT_EQ(BinomialTwoTailedHalf(5, 10), 1.0);
  EXPECT_EQ(BinomialTwoTailedHalf(0, 0), 1.0);
}

}  // namespace
}  // namespace authdrift::stats
