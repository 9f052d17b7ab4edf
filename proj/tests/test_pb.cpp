#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "solvate/energy.hpp"
#include "solvate/errors.hpp"
#include "solvate/pb.hpp"
#include "solvate/profiles.hpp"
#include "solvate/quadrature.hpp"

using namespace solvate;

namespace {

// Uniform-permittivity potential of a normalised Gaussian charge, grounded at rmax.
double gaussian_potential(double r, double Q, double a, double eps, double rmax) {
  auto u = [&](double t) {
    return t < 1e-12 ? Q * std::sqrt(2 / std::numbers::pi) / (4 * std::numbers::pi * eps * a)
                     : Q * std::erf(t / (std::sqrt(2.0) * a)) / (4 * std::numbers::pi * eps * t);
  };
  return u(r) - u(rmax);
}

}  // namespace

TEST(PoissonBoltzmann, ZeroDataGivesZeroPotential) {
  SolvationParams p;
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {16, 16, 0});
  auto sys = PhaseFieldSystem::build(g, p, {}, IonicModel::symmetric_salt(0.2));
  EXPECT_FALSE(sys.electrostatics_active());
  const auto phi = lift_profile(Profile::canonical(0.2), InterfaceShape::ball({0, 0, 0}, 0.5), g);
  const auto s = solve_pb(sys, phi);
  EXPECT_EQ(s.psi.max_abs(), 0.0);
  EXPECT_LE(s.iterations, 1);
  EXPECT_EQ(s.f_ele(), 0.0);
}

TEST(PoissonBoltzmann, UniformDielectricMatchesGaussianPotential) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 2.0;
  a.smear_width = 0.3;
  const double rmax = 4.0;
  auto g = StructuredGrid::radial(rmax, 800);
  auto sys = PhaseFieldSystem::build(g, p, {a}, {});
  // equal permittivities on both sides: the problem layer accepts what model validation forbids
  const auto s = solve_sharp(InterfaceShape::ball({0, 0, 0}, 1.0), g, {5.0, 5.0, DielectricKind::quintic}, {}, 1.0,
                             sys.rho, sys.psi_inf);
  double err = 0;
  for (std::size_t i = 0; i < g->node_count(); ++i)
    err = std::max(err, std::abs(s.psi[i] - gaussian_potential(g->coord(i)[0], 2.0, 0.3, 5.0, rmax)));
  EXPECT_LT(err, 2e-4);
  // F_ele = 1/2 int rho psi for the linear problem
  const double exact = integrate_adaptive(
      [&](double r) {
        return 0.5 * 4 * std::numbers::pi * r * r * smeared_charge_density({r, 0, 0}, sys.atoms, 3) *
               gaussian_potential(r, 2.0, 0.3, 5.0, rmax);
      },
      0.0, rmax, 1e-12);
  EXPECT_NEAR(s.f_ele(), exact, 1e-3 * exact);
}

TEST(PoissonBoltzmann, SolutionMinimisesDiscreteEnergy) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 30.0;
  auto g = StructuredGrid::radial(5.0, 120);
  auto sys = PhaseFieldSystem::build(g, p, {a}, IonicModel::symmetric_salt(0.3));
  const auto shape = InterfaceShape::ball({0, 0, 0}, 1.5);
  const auto prob = make_sharp_problem(shape, g, sys.dielectric, sys.ionic, p.kBT, sys.rho, sys.psi_inf);
  const auto s = solve(prob);
  EXPECT_LE(s.residual, 1e-10);
  EXPECT_NEAR(electrostatic_energy(prob, s.psi), s.energy, 1e-12 * std::abs(s.energy));
  for (double t : {1e-3, -1e-3}) {
    auto u = s.psi;
    for (std::size_t i = 0; i + 1 < g->node_count(); ++i) u.values()[i] += t * std::sin(double(i));
    EXPECT_GT(electrostatic_energy(prob, u), s.energy);
  }
  auto bad = s.psi;
  bad.values().back() = 1.0;
  EXPECT_THROW(electrostatic_energy(prob, bad), AdmissibilityError);
}

TEST(PoissonBoltzmann, NewtonConvergesQuadratically) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 1e4;
  auto g = StructuredGrid::radial(6.0, 192);
  auto sys = PhaseFieldSystem::build(g, p, {a}, IonicModel::symmetric_salt(0.5));
  const auto s = solve_pb_sharp(sys, InterfaceShape::ball({0, 0, 0}, 2.0));
  ASSERT_GE(s.iterations, 3);
  EXPECT_LE(newton_contraction(s.residual_history), 0.3);
  // the contraction ratio itself
  EXPECT_DOUBLE_EQ(newton_contraction({1.0, 0.5, 0.1, 0.01}), 0.5);
}

TEST(PoissonBoltzmann, SaltScreensThePotential) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 1.0;
  auto g = StructuredGrid::radial(8.0, 160);
  const auto shape = InterfaceShape::ball({0, 0, 0}, 1.0);
  const auto plain = solve_pb_sharp(PhaseFieldSystem::build(g, p, {a}, {}), shape);
  const auto salty = solve_pb_sharp(PhaseFieldSystem::build(g, p, {a}, IonicModel::symmetric_salt(0.5)), shape);
  const std::size_t mid = g->node_count() / 2;
  EXPECT_LT(std::abs(salty.psi[mid]), std::abs(plain.psi[mid]));
  // the ionic term raises the minimum of E, so F_ele = -min E drops
  EXPECT_LT(salty.f_ele(), plain.f_ele());
}

TEST(PoissonBoltzmann, DiffuseApproachesSharpAsXiShrinks) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 1.0;
  const auto shape = InterfaceShape::ball({0, 0, 0}, 2.0);
  auto fine = StructuredGrid::radial(6.0, 1200);
  auto sys = PhaseFieldSystem::build(fine, p, {a}, IonicModel::symmetric_salt(0.1));
  const double sharp = solve_pb_sharp(sys, shape).f_ele();
  std::vector<double> err;
  for (double xi : {0.2, 0.1, 0.05})
    err.push_back(std::abs(solve_pb(sys, lift_profile(Profile::canonical(xi), shape, fine)).f_ele() - sharp));
  EXPECT_LT(err[1], err[0]);
  EXPECT_LT(err[2], err[1]);
  EXPECT_LT(err[2] / sharp, 0.01);
}

TEST(PoissonBoltzmann, BoundCheckFlagsOversizedPotential) {
  SolvationParams p;
  SoluteAtom a;
  a.charge = 1e5;
  auto g = StructuredGrid::radial(4.0, 64);
  PBOptions opt;
  opt.c_bound = 1e-3;
  auto sys = PhaseFieldSystem::build(g, p, {a}, {}, DielectricKind::quintic, 1e3, FarField::zero, opt);
  EXPECT_THROW(solve_pb_sharp(sys, InterfaceShape::ball({0, 0, 0}, 1.0)), BoundViolation);
}

TEST(PoissonBoltzmann, DiagnosticsJsonNamesFields) {
  SolvationParams p;
  auto g = StructuredGrid::radial(2.0, 16);
  SoluteAtom a;
  a.charge = 1;
  const auto s = solve_pb_sharp(PhaseFieldSystem::build(g, p, {a}, {}), InterfaceShape::ball({0, 0, 0}, 1.0));
  const auto j = s.diagnostics_json();
  for (const char* key : {"iterations", "residual", "f_ele"}) EXPECT_NE(j.find(key), std::string::npos) << key;
}
