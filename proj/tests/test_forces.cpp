#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "solvate/errors.hpp"
#include "solvate/forces.hpp"
#include "solvate/profiles.hpp"

using namespace solvate;

namespace {

constexpr double kPi = std::numbers::pi;

Cutoff unit_cutoff() {
  Cutoff c;
  c.r1 = 0.6;
  c.r2 = 0.9;
  return c;
}

}  // namespace

TEST(Cutoff, PlateauSupportAndGradient) {
  const auto c = unit_cutoff();
  EXPECT_EQ(c.value({0.3, 0.1, 0}), 1.0);
  EXPECT_EQ(c.value({0.95, 0, 0}), 0.0);
  EXPECT_TRUE(c.vanishes_near({0.95, 0, 0}));
  EXPECT_FALSE(c.vanishes_near({0.7, 0, 0}));
  const Point x{0.5, 0.4, 0.1};
  const auto g = c.gradient(x);
  for (int k = 0; k < 3; ++k) {
    Point p = x, m = x;
    p[k] += 1e-6;
    m[k] -= 1e-6;
    EXPECT_NEAR(g[k], (c.value(p) - c.value(m)) / 2e-6, 1e-6);
  }
  Cutoff ring = c;
  ring.inner1 = 0.1;
  ring.inner2 = 0.2;
  EXPECT_EQ(ring.value({0.05, 0, 0}), 0.0);
  EXPECT_TRUE(ring.vanishes_near({0.05, 0, 0}));
}

TEST(TestFields, JacobianMatchesDifferences) {
  const auto c = unit_cutoff();
  for (const auto& v : {TestField::radial(c), TestField::rotational(c), TestField::polynomial(3, 2, c),
                        TestField::constant({1, 2, 0}, c).scaled(0.5).plus(TestField::radial(c))}) {
    const Point x{0.31, -0.52, 0.0};
    const auto J = v.jacobian(x);
    for (int j = 0; j < 2; ++j) {
      Point p = x, m = x;
      p[j] += 1e-6;
      m[j] -= 1e-6;
      const auto vp = v.value(p), vm = v.value(m);
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(J[3 * i + j], (vp[i] - vm[i]) / 2e-6, 1e-6);
    }
  }
  EXPECT_EQ(TestField::zero().value({0.1, 0.2, 0})[0], 0.0);
}

TEST(TestFields, PolynomialFieldsAreSeeded) {
  const auto c = unit_cutoff();
  const Point x{0.2, 0.1, 0};
  EXPECT_EQ(TestField::polynomial(5, 2, c).value(x), TestField::polynomial(5, 2, c).value(x));
  EXPECT_NE(TestField::polynomial(5, 2, c).value(x), TestField::polynomial(6, 2, c).value(x));
}

TEST(Variation, MatchesDirectionalDifferenceOfEnergy) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 1;
  a.lj_energy = 0.3;
  a.lj_length = 0.3;
  a.smear_width = 0.2;
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {24, 24, 0});
  auto sys = PhaseFieldSystem::build(g, p, {a}, IonicModel::symmetric_salt(0.1));
  const double xi = 0.25;
  // plain field: the discrete energy is what is being differentiated
  const auto lifted = lift_profile(Profile::canonical(xi), InterfaceShape::ball({0, 0, 0}, 0.5), g);
  const ScalarField phi(g, lifted.data());
  const auto pb = solve_pb(sys, phi);
  const auto dF = variation_delta_F(sys, phi, xi, pb);
  std::vector<double> eta(g->node_count(), 0.0);
  for (std::size_t i = 0; i < g->node_count(); ++i) {
    const auto x = g->coord(i);
    const double q = std::hypot(x[0] - 0.3, x[1] + 0.2) / 0.4;
    if (q < 1) eta[i] = std::pow(1 - q * q, 3);
  }
  double lin = 0;
  for (std::size_t i = 0; i < g->node_count(); ++i) lin += g->weights()[i] * dF[i] * eta[i];
  const double h = 1e-4;
  auto shifted = [&](double t) {
    ScalarField f(g, phi.data());
    for (std::size_t i = 0; i < g->node_count(); ++i) f.values()[i] += t * eta[i];
    return evaluate_F_xi(sys, f, xi).total;
  };
  const double fd = (shifted(h) - shifted(-h)) / (2 * h);
  EXPECT_NEAR(lin, fd, 1e-4 * std::abs(fd));

  const ScalarField other(g, 0.5);
  EXPECT_THROW(variation_delta_F(sys, other, xi, pb), ConsistencyError);
}

TEST(ChTensor, PlaneProfileGivesTangentialProjection) {
  // for an equi-partitioned plane profile, int T_ch dx across the interface = (I - nu nu) per unit area
  auto g = StructuredGrid::cartesian(2, {-1, 0, 0}, {1, 0.25, 0}, {800, 8, 0});
  const double xi = 0.1;
  const auto phi = lift_profile(Profile::canonical(xi), InterfaceShape::plane({1, 0, 0}, 0.0), g);
  const auto T = ch_tensor(phi, xi);
  std::vector<double> xx(g->node_count()), yy(g->node_count()), xy(g->node_count());
  for (std::size_t i = 0; i < g->node_count(); ++i) {
    xx[i] = T.entry(i, 0, 0);
    yy[i] = T.entry(i, 1, 1);
    xy[i] = T.entry(i, 0, 1);
  }
  EXPECT_NEAR(integrate(g, xx), 0.0, 1e-10);
  EXPECT_NEAR(integrate(g, yy), 0.25, 1e-4);
  EXPECT_NEAR(integrate(g, xy), 0.0, 1e-12);
}

TEST(Pairings, VdwSupportMustAvoidAtoms) {
  SolvationParams p;
  SoluteAtom a;
  a.lj_energy = 1;
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {16, 16, 0});
  auto sys = PhaseFieldSystem::build(g, p, {a}, {});
  const auto phi = lift_profile(Profile::canonical(0.2), InterfaceShape::ball({0, 0, 0}, 0.5), g);
  const ScalarField psi(g, 0.0);
  const auto S = stress_set(sys, phi, 0.2, psi);
  EXPECT_THROW(weak_pairing(sys, S, StressTerm::vdw, TestField::radial(unit_cutoff()), phi, psi), SupportViolation);
  Cutoff ring = unit_cutoff();
  ring.inner1 = 0.1;
  ring.inner2 = 0.2;
  EXPECT_NO_THROW(weak_pairing(sys, S, StressTerm::vdw, TestField::radial(ring), phi, psi));
}

TEST(Pairings, StressAndForceAgreeOnSmoothFields) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 1;
  a.smear_width = 0.3;
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {96, 96, 0});
  auto sys = PhaseFieldSystem::build(g, p, {a}, IonicModel::symmetric_salt(0.1));
  const double xi = 0.2;
  const auto phi = lift_profile(Profile::canonical(xi), InterfaceShape::ball({0, 0, 0}, 0.5), g);
  const auto pb = solve_pb(sys, phi);
  const auto S = stress_set(sys, phi, xi, pb.psi);
  const auto F = force_densities(sys, phi, xi, pb.psi);
  const auto V = TestField::polynomial(11, 2, unit_cutoff());
  // weak form of div T = f
  EXPECT_NEAR(weak_pairing(sys, S, StressTerm::vol, V, phi, pb.psi), force_pairing(F.vol, V), 1e-3);
  EXPECT_NEAR(weak_pairing(sys, S, StressTerm::sur, V, phi, pb.psi), force_pairing(F.sur, V), 5e-3);
}

TEST(Pairings, CurvatureFormOnCanonicalDisk) {
  // for the logistic lift the pairing integrand is -(n-1) xi g'^2 (x . x / r), which concentrates on the circle
  const double R = 0.4, xi = 0.02;
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {400, 400, 0});
  const auto phi = lift_profile(Profile::canonical(xi), InterfaceShape::ball({0, 0, 0}, R), g);
  const auto V = TestField::radial(unit_cutoff());
  // -(n-1) H int nu . x dS with H = 1/R and int nu . x dS = 2 pi R^2
  const double target = -(1.0 / R) * 2 * kPi * R * R;
  EXPECT_NEAR(curvature_pairing(phi, xi, V), target, 0.03 * std::abs(target));
}

TEST(SharpForces, BornBallNormalForcesHaveExpectedSigns) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 1;
  auto g = StructuredGrid::radial(6.0, 384);
  auto sys = PhaseFieldSystem::build(g, p, {a}, {});
  const auto shape = InterfaceShape::ball({0, 0, 0}, 2.0);
  const auto pb = solve_pb_sharp(sys, shape);
  Cutoff c;
  c.r1 = 3;
  c.r2 = 4;
  c.inner1 = 0.5;
  c.inner2 = 1;
  const auto sf = sharp_boundary_force(sys, shape, pb, TestField::radial(c));
  ASSERT_FALSE(sf.samples.empty());
  const auto& s0 = sf.samples.front();
  EXPECT_DOUBLE_EQ(s0.f_vol, -p.pressure);
  EXPECT_NEAR(s0.f_sur, -2 * p.surface_tension / 2.0, 1e-12);
  // Born: D = Q / (4 pi R^2), f_ele = -1/2 (1/eps_p - 1/eps_w) D^2 (no tangential field, no ions)
  const double D = 1.0 / (4 * kPi * 4.0);
  EXPECT_NEAR(s0.f_ele, -0.5 * (1 / p.eps_p - 1 / p.eps_w) * D * D, 2e-2 * 0.5 * D * D);
  // weak volume form: -P0 int nu . V dS = -P0 * R * 4 pi R^2
  EXPECT_NEAR(sf.weak_vol, -p.pressure * 2.0 * 4 * kPi * 4.0, 1e-8);
  const auto [bulk, surf] = dielectric_force_identity_check(sys, shape, pb, TestField::radial(c));
  EXPECT_NEAR(bulk, surf, 0.01 * std::abs(surf));
}
