#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "solvate/errors.hpp"
#include "solvate/profiles.hpp"
#include "solvate/relax.hpp"

using namespace solvate;

namespace {

PhaseFieldSystem disk_system(const GridPtr& g) {
  SolvationParams p;
  p.pressure = 0.05;
  SoluteAtom a;
  a.charge = 1;
  a.smear_width = 0.2;
  return PhaseFieldSystem::build(g, p, {a}, IonicModel::symmetric_salt(0.1));
}

}  // namespace

TEST(Flow, EnergyNeverIncreases) {
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {24, 24, 0});
  const auto sys = disk_system(g);
  const double xi = 0.25;
  const auto phi0 = lift_profile(Profile::canonical(xi), InterfaceShape::ball({0, 0, 0}, 0.5), g);
  FlowOptions opt;
  opt.max_steps = 25;
  const auto st = minimize(sys, xi, phi0, 1e-6, opt);
  ASSERT_GE(st.energy_history.size(), 2u);
  for (std::size_t k = 1; k < st.energy_history.size(); ++k)
    EXPECT_LE(st.energy_history[k], st.energy_history[k - 1] + 1e-12);
  EXPECT_LT(st.energy.total, start_flow(sys, phi0, xi, opt).energy.total);
  EXPECT_LE(st.phi.max_abs(), st.bound);
}

TEST(Flow, StrictRefreshAlsoDescends) {
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {16, 16, 0});
  const auto sys = disk_system(g);
  const double xi = 0.3;
  const auto phi0 = lift_profile(Profile::canonical(xi), InterfaceShape::ball({0, 0, 0}, 0.5), g);
  FlowOptions opt;
  opt.pb_refresh = 1;
  auto st = start_flow(sys, phi0, xi, opt);
  for (int k = 0; k < 5; ++k) {
    const double before = st.energy.total;
    st = flow_step(sys, st, opt);
    EXPECT_LE(st.energy.total, before);
  }
}

TEST(Flow, PlaneProfileRelaxesTowardsEquipartition) {
  // with no bulk terms a 1D interface relaxes to the logistic profile, which is exactly equi-partitioned
  auto g = StructuredGrid::cartesian(1, {-1, 0, 0}, {1, 0, 0}, {160, 0, 0});
  SolvationParams p;
  p.pressure = 1e-12;
  p.solvent_density = 1e-12;
  const auto sys = PhaseFieldSystem::build(g, p, {}, {});
  const double xi = 0.2;
  const auto plane = InterfaceShape::plane({1, 0, 0}, 0.0);
  const auto wide = lift_profile(Profile::canonical(2 * xi), plane, g);
  FlowOptions opt;
  opt.max_steps = 400;
  opt.pinned.assign(g->node_count(), 0);
  opt.pinned.front() = opt.pinned.back() = 1;
  const auto st = minimize(sys, xi, ScalarField(g, wide.data()), 1e-6, opt);
  EXPECT_FALSE(st.partial);
  EXPECT_LT(discrepancy(st.phi, xi).l1, 0.01 * discrepancy(ScalarField(g, wide.data()), xi).l1);
}

TEST(Flow, InfiniteToleranceReturnsStartAndBadToleranceThrows) {
  auto g = StructuredGrid::cartesian(1, {-1, 0, 0}, {1, 0, 0}, {20, 0, 0});
  const auto sys = PhaseFieldSystem::build(g, SolvationParams{}, {}, {});
  const ScalarField phi(g, 0.3);
  const auto st = minimize(sys, 0.2, phi, std::numeric_limits<double>::infinity());
  EXPECT_EQ(st.step, 0);
  EXPECT_EQ(st.phi.data(), phi.data());
  EXPECT_THROW(minimize(sys, 0.2, phi, 0.0), DomainError);
}

TEST(Flow, ScheduleValidation) {
  EXPECT_NO_THROW(validate_schedule({0.2, 0.1, 0.05}));
  EXPECT_THROW(validate_schedule({0.1, 0.2}), ValidationError);
  EXPECT_THROW(validate_schedule({0.8, 0.1}), ValidationError);
  EXPECT_THROW(validate_schedule({}), ValidationError);
  EXPECT_THROW(validate_schedule({0.1, -0.1}), ValidationError);
}

TEST(Flow, ContinuationWarmStartsAcrossGrids) {
  auto factory = [](double xi) {
    const int n = static_cast<int>(std::lround(2.0 / (xi / 4)));
    return disk_system(StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {n, n, 0}));
  };
  const std::vector<double> schedule{0.4, 0.3};
  const auto g0 = factory(0.4).grid;
  const auto phi0 = lift_profile(Profile::canonical(0.4), InterfaceShape::ball({0, 0, 0}, 0.5), g0);
  FlowOptions opt;
  opt.max_steps = 6;
  const auto states = xi_continuation(factory, schedule, phi0, 1e-9, opt);
  ASSERT_EQ(states.size(), 2u);
  EXPECT_DOUBLE_EQ(states[1].xi, 0.3);
  EXPECT_FALSE(states[1].phi.grid()->same_as(*states[0].phi.grid()));
  const auto csv = flow_log_csv(states[1]);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,t,dt,F_total,volume,surface,vdw,ele,grad_norm");
  // partial flag set because the step budget ran out before the tight tolerance
  EXPECT_TRUE(states[1].partial);
}
