#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "solvate/converge.hpp"
#include "solvate/report.hpp"

using namespace solvate;

TEST(Richardson, RecoversSyntheticPowerLaw) {
  const std::vector<double> xi{0.2, 0.1, 0.05, 0.025};
  std::vector<double> v;
  for (double x : xi) v.push_back(3.0 + 0.7 * std::pow(x, 1.5));
  const auto f = richardson_fit(xi, v);
  EXPECT_TRUE(f.converged);
  EXPECT_NEAR(f.limit, 3.0, 1e-9);
  EXPECT_NEAR(f.exponent, 1.5, 1e-6);
}

TEST(Richardson, NonMonotoneDataFallsBack) {
  const auto f = richardson_fit({0.2, 0.1, 0.05}, {1.0, 2.0, 1.5});
  EXPECT_FALSE(f.converged);
  EXPECT_TRUE(std::isnan(f.exponent));
  EXPECT_DOUBLE_EQ(f.limit, 1.5);
}

TEST(RelError, FloorGuardsZeroTargets) {
  EXPECT_DOUBLE_EQ(rel_error(1.1, 1.0, 1e-12), 0.10000000000000009);
  EXPECT_DOUBLE_EQ(rel_error(1e-3, 0.0, 0.5), 2e-3);
}

TEST(Series, FinishComputesErrorsAndMonotonicity) {
  Series s;
  s.xi = {0.2, 0.1, 0.05};
  s.values = {1.2, 1.05, 1.01};
  s.targets = {1.0, 1.0, 1.0};
  s.finish(1e-12);
  EXPECT_NEAR(s.final_rel_error, 0.01, 1e-12);
  EXPECT_TRUE(s.monotone);
  s.values = {1.2, 1.3, 1.01};
  s.finish(1e-12);
  EXPECT_FALSE(s.monotone);
}

TEST(GridRecipe, SpacingFollowsXi) {
  GridRecipe r;
  r.lo = {-1, 0, 0};
  r.hi = {1, 1, 0};
  r.fixed_cells = {0, 8, 0};
  const auto g = r.build(0.05);
  EXPECT_EQ(g->cells(0), 320);
  EXPECT_EQ(g->cells(1), 8);
  GridRecipe rad;
  rad.radial = true;
  rad.rmax = 3;
  EXPECT_TRUE(rad.build(0.1)->is_radial());
  EXPECT_NEAR(rad.build(0.1)->h(0), 0.1 / 8, 1e-12);
}

TEST(Tolerances, ScaleLeavesOrderAndFloor) {
  StudyTolerances t;
  t.scale(2);
  EXPECT_DOUBLE_EQ(t.surface, 0.04);
  EXPECT_DOUBLE_EQ(t.order, 1.9);
  EXPECT_DOUBLE_EQ(t.floor, 1e-12);
}

TEST(Studies, ThreadCountDoesNotChangeResults) {
  StudySetup s;
  s.grid.lo = {-1, 0, 0};
  s.grid.hi = {1, 1, 0};
  s.grid.fixed_cells = {0, 8, 0};
  s.shape = InterfaceShape::plane({1, 0, 0}, 0.0);
  s.profile = ProfileKind::recovery;
  s.threads = 1;
  const auto a = tidy_csv(equipartition_study(s));
  s.threads = 5;
  const auto b = tidy_csv(equipartition_study(s));
  EXPECT_EQ(a, b);
}

TEST(Studies, EnergyStudyWithoutElectrostaticsConverges) {
  StudySetup s;
  s.grid.radial = true;
  s.grid.rmax = 3;
  s.shape = InterfaceShape::ball({0, 0, 0}, 1.5);
  s.schedule = {0.1, 0.05, 0.025, 0.0125};
  const auto r = energy_component_study(s);
  ASSERT_TRUE(r.target_row.has_value());
  EXPECT_EQ(r.rows.size(), 4u);
  EXPECT_TRUE(r.passed()) << render_table(r);
  EXPECT_NEAR(r.find("volume")->targets.back(), s.params.pressure * 4.0 / 3.0 * std::numbers::pi * 3.375, 1e-9);
}

TEST(Studies, SolvationForceGateAndPairings) {
  StudySetup s;
  s.grid.radial = true;
  s.grid.rmax = 6;
  s.shape = InterfaceShape::ball({0, 0, 0}, 2.0);
  SoluteAtom a;
  a.charge = 1;
  s.atoms = {a};
  s.cutoff.r1 = 3;
  s.cutoff.r2 = 4;
  s.cutoff.inner1 = 0.5;
  s.cutoff.inner2 = 1;
  s.schedule = {0.1, 0.05, 0.025, 0.0125};
  const auto r = solvation_force_study(s);
  EXPECT_EQ(r.status, "ok") << render_table(r);
  EXPECT_FALSE(r.series.empty());
}

TEST(Studies, UnknownStudyNameRejected) {
  StudySetup s;
  s.study = "nonsense";
  EXPECT_ANY_THROW(run_named_study(s));
}
