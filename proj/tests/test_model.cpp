#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "solvate/errors.hpp"
#include "solvate/model.hpp"
#include "solvate/quadrature.hpp"

using namespace solvate;

namespace {

double central(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace

TEST(DoubleWell, ZerosAndMaximum) {
  EXPECT_EQ(eval_W(0.0), 0.0);
  EXPECT_EQ(eval_W(1.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_W(0.5), 18.0 / 16.0);
  EXPECT_DOUBLE_EQ(eval_W(-1.0), 18.0 * 4.0);
}

TEST(DoubleWell, DerivativesMatchDifferences) {
  for (double p : {-0.7, 0.1, 0.33, 0.5, 0.9, 1.4}) {
    EXPECT_NEAR(eval_W_prime(p), central(eval_W, p), 1e-6);
    EXPECT_NEAR(eval_W_second(p), central(eval_W_prime, p), 1e-6);
  }
}

TEST(DoubleWell, EtaIsAntiderivativeOfSqrt2W) {
  for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const double q = integrate_adaptive(eval_sqrt_2W, 0.0, p, 1e-12);
    EXPECT_NEAR(eval_eta(p), q, 1e-12);
  }
  EXPECT_DOUBLE_EQ(eval_eta(1.0), 1.0);
  // sqrt(2W) by direct evaluation
  for (double p : {0.1, 0.6}) EXPECT_NEAR(eval_sqrt_2W(p), std::sqrt(2 * eval_W(p)), 1e-14);
}

TEST(Ionic, BoltzmannDensityAgainstDirectSum) {
  IonicModel ions({{0.2, 1.0}, {0.1, -2.0}});
  const double kT = 0.7;
  for (double s : {-1.0, 0.0, 0.3, 2.0}) {
    const double direct = kT * (0.2 * (std::exp(-s / kT) - 1) + 0.1 * (std::exp(2 * s / kT) - 1));
    EXPECT_NEAR(eval_B(s, ions, kT), direct, 1e-12 * std::max(1.0, std::abs(direct)));
    EXPECT_NEAR(eval_B_prime(s, ions, kT), central([&](double t) { return eval_B(t, ions, kT); }, s),
                1e-6 * std::max(1.0, std::abs(direct)));
    EXPECT_NEAR(eval_B_second(s, ions, kT), central([&](double t) { return eval_B_prime(t, ions, kT); }, s),
                1e-5 * std::max(1.0, std::abs(direct)));
  }
  EXPECT_EQ(eval_B(0.0, ions, kT), 0.0);
  // neutrality makes B'(0) vanish
  EXPECT_NEAR(eval_B_prime(0.0, ions, kT), 0.0, 1e-15);
}

TEST(Ionic, ValidationFlagsNonNeutralAndEmpty) {
  EXPECT_TRUE(IonicModel::symmetric_salt(0.1).violations().empty());
  EXPECT_FALSE(IonicModel().violations().empty());
  EXPECT_THROW(IonicModel({{0.1, 1.0}, {0.1, -2.0}}), ValidationError);
  EXPECT_THROW(IonicModel({{-0.1, 1.0}, {-0.1, -1.0}}), ValidationError);
}

TEST(Params, DistinctPermittivitiesRequired) {
  SolvationParams p;
  EXPECT_TRUE(p.violations().empty());
  p.eps_w = p.eps_p;
  ASSERT_EQ(p.violations().size(), 1u);
  EXPECT_NE(p.violations()[0].find("positive and distinct"), std::string::npos);
  p = {};
  p.pressure = 0.0;
  p.surface_tension = -1.0;
  EXPECT_EQ(p.violations().size(), 2u);
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Dielectric, EndpointsMonotoneAndDerivative) {
  for (auto kind : {DielectricKind::quintic, DielectricKind::cubic}) {
    DielectricProfile d{2.0, 80.0, kind};
    EXPECT_DOUBLE_EQ(eval_eps(0.0, d), 80.0);
    EXPECT_DOUBLE_EQ(eval_eps(1.0, d), 2.0);
    EXPECT_DOUBLE_EQ(eval_eps(-0.3, d), 80.0);
    EXPECT_DOUBLE_EQ(eval_eps(1.3, d), 2.0);
    double prev = eval_eps(0.0, d);
    for (int k = 1; k <= 100; ++k) {
      const double e = eval_eps(k / 100.0, d);
      EXPECT_LE(e, prev);
      prev = e;
    }
    for (double p : {0.2, 0.5, 0.77})
      EXPECT_NEAR(eval_eps_prime(p, d), central([&](double t) { return eval_eps(t, d); }, p), 1e-5);
    EXPECT_EQ(eval_eps_prime(0.0, d), 0.0);
    EXPECT_EQ(eval_eps_prime(1.0, d), 0.0);
  }
}

TEST(LennardJones, ClosedFormMinimumAndGradient) {
  SoluteAtom a;
  a.lj_energy = 0.8;
  a.lj_length = 1.3;
  const std::vector<SoluteAtom> atoms{a};
  const double rmin = std::pow(2.0, 1.0 / 6.0) * a.lj_length;
  EXPECT_NEAR(eval_U({rmin, 0, 0}, atoms), -a.lj_energy, 1e-14);
  EXPECT_NEAR(eval_U({a.lj_length, 0, 0}, atoms), 0.0, 1e-14);
  const Point x{0.7, -1.1, 0.4};
  const auto g = eval_U_gradient(x, atoms);
  for (int k = 0; k < 3; ++k) {
    auto f = [&](double t) {
      Point y = x;
      y[k] = t;
      return eval_U(y, atoms);
    };
    EXPECT_NEAR(g[k], central(f, x[k], 1e-6), 1e-6 * std::max(1.0, std::abs(g[k])));
  }
  EXPECT_EQ(eval_U({0, 0, 0}, atoms), kInfinity);
  EXPECT_EQ(eval_U_capped({0, 0, 0}, atoms, 50.0), 50.0);
  EXPECT_THROW(eval_U_gradient({0, 0, 0}, atoms), SingularityError);
}

TEST(SmearedCharge, IntegratesToTotalCharge) {
  SoluteAtom a;
  a.charge = -2.5;
  a.smear_width = 0.4;
  const std::vector<SoluteAtom> atoms{a};
  const double q3 = integrate_adaptive(
      [&](double r) { return 4 * std::numbers::pi * r * r * smeared_charge_density({r, 0, 0}, atoms, 3); }, 0.0,
      10.0, 1e-12);
  EXPECT_NEAR(q3, a.charge, 1e-10);
  const double q2 = integrate_adaptive(
      [&](double r) { return 2 * std::numbers::pi * r * smeared_charge_density({r, 0, 0}, atoms, 2); }, 0.0, 10.0,
      1e-12);
  EXPECT_NEAR(q2, a.charge, 1e-10);
}
