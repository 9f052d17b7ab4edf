#include <gtest/gtest.h>

#include <cmath>

#include "solvate/errors.hpp"
#include "solvate/model.hpp"
#include "solvate/profiles.hpp"
#include "solvate/quadrature.hpp"

using namespace solvate;

TEST(Canonical, LogisticClosedForm) {
  const double xi = 0.07;
  const auto p = Profile::canonical(xi);
  for (double s : {-0.3, -0.05, 0.0, 0.02, 0.4}) {
    EXPECT_NEAR(p.value(s), 1.0 / (1.0 + std::exp(-6.0 * s / xi)), 1e-15);
    const double g = p.value(s);
    EXPECT_NEAR(xi * p.d1(s), 6 * g * (1 - g), 1e-13);
    EXPECT_NEAR(p.d2(s), (p.d1(s + 1e-6) - p.d1(s - 1e-6)) / 2e-6, 1e-4 * std::max(1.0, std::abs(p.d2(s))));
  }
  EXPECT_DOUBLE_EQ(p.value(0.0), 0.5);
}

TEST(Canonical, EquipartitionAndUnitLineEnergy) {
  const double xi = 0.2;
  const auto p = Profile::canonical(xi);
  for (double s : {-0.5, 0.0, 0.3}) EXPECT_NEAR(0.5 * xi * p.d1(s) * p.d1(s), eval_W(p.value(s)) / xi, 1e-12);
  const double e = integrate_adaptive(
      [&](double s) { return 0.5 * xi * p.d1(s) * p.d1(s) + eval_W(p.value(s)) / xi; }, -10 * xi, 10 * xi, 1e-12);
  EXPECT_NEAR(e, 1.0, 1e-8);
}

TEST(GkProfile, InverseOfForwardMap) {
  const double xi = 0.05, a = 4.0;
  const auto p = Profile::gk(xi, a);
  // lambda = int_0^1 xi / sqrt(2 (W/a + xi))
  const double lambda =
      integrate_adaptive([&](double t) { return xi / std::sqrt(2 * (eval_W(t) / a + xi)); }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(p.width(), lambda, 1e-9);
  for (double t : {0.1, 0.5, 0.93}) {
    const double s = p.q(t) + p.support_lo();
    EXPECT_NEAR(p.value(s), t, 1e-8);
    // g' = sqrt(2 (W/a + xi)) / xi on the transition
    EXPECT_NEAR(p.d1(s), std::sqrt(2 * (eval_W(t) / a + xi)) / xi, 1e-6 * p.d1(s));
  }
  EXPECT_EQ(p.value(p.support_lo() - 1e-3), 0.0);
  EXPECT_EQ(p.value(p.support_hi() + 1e-3), 1.0);
}

TEST(GkProfile, LineEnergyApproachesBeta) {
  for (double a : {1.0, 4.0}) {
    const double xi = 1e-4;
    const auto p = Profile::gk(xi, a);
    const double e = integrate_adaptive(
        [&](double s) { return 0.5 * xi * p.d1(s) * p.d1(s) + eval_W(p.value(s)) / xi; }, p.support_lo(),
        p.support_hi(), 1e-10);
    EXPECT_NEAR(e, beta_limit(a), 0.02);
  }
  EXPECT_DOUBLE_EQ(beta_limit(1.0), 1.0);
  EXPECT_DOUBLE_EQ(beta_limit(4.0), 1.25);
  EXPECT_THROW(beta_limit(0.0), DomainError);
}

TEST(Recovery, CollarStructure) {
  const double xi = 0.04;
  const auto p = Profile::recovery(xi);
  EXPECT_NEAR(p.width(), std::sqrt(xi), 1e-15);
  EXPECT_EQ(p.value(-1e-3), 0.0);
  EXPECT_EQ(p.value(std::sqrt(xi) + 1e-3), 1.0);
  double prev = 0;
  for (int k = 0; k <= 50; ++k) {
    const double v = p.value(k * std::sqrt(xi) / 50);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Lift, ExactDerivativesMatchAnalyticChainRule) {
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {20, 20, 0});
  auto shape = InterfaceShape::ball({0, 0, 0}, 0.5);
  const auto p = Profile::canonical(0.1);
  const auto phi = lift_profile(p, shape, g);
  ASSERT_TRUE(phi.has_exact());
  const auto& grad = phi.exact_gradient();
  const auto& lap = phi.exact_laplacian();
  for (std::size_t i = 0; i < g->node_count(); i += 37) {
    const auto x = g->coord(i);
    const double r = std::hypot(x[0], x[1]);
    if (r < 1e-9) continue;
    const double s = 0.5 - r;
    EXPECT_NEAR(phi[i], p.value(s), 1e-15);
    EXPECT_NEAR(grad[2 * i], -p.d1(s) * x[0] / r, 1e-10);
    // lap g(d) = g'' |grad d|^2 + g' lap d, lap d = -1/r in 2D
    EXPECT_NEAR(lap[i], p.d2(s) - p.d1(s) / r, 1e-8 * std::max(1.0, std::abs(lap[i])));
  }
}

TEST(Lift, L1DistanceToIndicatorShrinksWithXi) {
  auto g = StructuredGrid::cartesian(1, {-1, 0, 0}, {1, 0, 0}, {4000, 0, 0});
  auto plane = InterfaceShape::plane({1, 0, 0}, 0.0);
  const double d1 = l1_distance_to_indicator(lift_profile(Profile::canonical(0.1), plane, g), plane);
  const double d2 = l1_distance_to_indicator(lift_profile(Profile::canonical(0.05), plane, g), plane);
  // int |g - 1_{s>0}| ds = 2 ln 2 xi / 6 for the logistic profile
  EXPECT_NEAR(d1, 2 * std::log(2.0) * 0.1 / 6, 1e-5);
  EXPECT_NEAR(d2 / d1, 0.5, 1e-3);
}

TEST(Recovery, ThinBallRejected) {
  auto g = StructuredGrid::radial(1.0, 40);
  EXPECT_THROW(recovery_phase_field(InterfaceShape::ball({0, 0, 0}, 0.1), 0.04, g), ShapeError);
}

TEST(ProfileCsv, HeaderAndRows) {
  const auto csv = Profile::canonical(0.1).csv(11);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,g");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}
