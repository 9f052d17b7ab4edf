#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "solvate/errors.hpp"
#include "solvate/field_io.hpp"
#include "solvate/grid.hpp"
#include "solvate/shape.hpp"

using namespace solvate;

namespace {

ScalarField sample(const GridPtr& g, const std::function<double(const Point&)>& f) {
  ScalarField out(g);
  for (std::size_t i = 0; i < g->node_count(); ++i) out.values()[i] = f(g->coord(i));
  return out;
}

double discrete_dirichlet(const ScalarField& f) {
  double s = 0;
  for (const auto& e : f.grid()->edges()) {
    const double d = (f[e.j] - f[e.i]) / e.h;
    s += 0.5 * e.volume * d * d;
  }
  return s;
}

}  // namespace

TEST(Grid, WeightsSumToMeasure) {
  auto g = StructuredGrid::cartesian(3, {-1, 0, 2}, {1, 3, 2.5}, {8, 12, 8});
  double s = 0;
  for (double w : g->weights()) s += w;
  EXPECT_NEAR(s, 2.0 * 3.0 * 0.5, 1e-12);
  EXPECT_NEAR(g->measure(), 3.0, 1e-12);

  auto r = StructuredGrid::radial(2.0, 64);
  s = 0;
  for (double w : r->weights()) s += w;
  EXPECT_NEAR(s, 4.0 / 3.0 * std::numbers::pi * 8.0, 1e-10);
}

TEST(Grid, EdgeSharesPartitionVolume) {
  for (auto g : {StructuredGrid::cartesian(2, {0, 0, 0}, {1, 2, 0}, {8, 9, 0}), StructuredGrid::radial(1.0, 11)})
    for (const auto& e : g->edges()) EXPECT_NEAR(e.share_i + e.share_j, e.volume, 1e-14);
}

TEST(Grid, IndexRoundTripAndBoundary) {
  auto g = StructuredGrid::cartesian(3, {0, 0, 0}, {1, 1, 1}, {8, 9, 10});
  for (std::size_t i = 0; i < g->node_count(); ++i) {
    auto m = g->multi_index(i);
    EXPECT_EQ(g->index(m[0], m[1], m[2]), i);
    const bool face = m[0] == 0 || m[0] == 8 || m[1] == 0 || m[1] == 9 || m[2] == 0 || m[2] == 10;
    EXPECT_EQ(g->on_boundary(i), face);
  }
  auto r = StructuredGrid::radial(1.0, 8);
  EXPECT_FALSE(r->on_boundary(0));
  EXPECT_TRUE(r->on_boundary(8));
}

TEST(Operators, QuadraticsAreDifferentiatedExactly) {
  auto g = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 2, 0}, {16, 20, 0});
  auto f = sample(g, [](const Point& x) { return 1 + 2 * x[0] - x[1] + 0.5 * x[0] * x[0] + 3 * x[0] * x[1]; });
  const auto grad = gradient(f);
  const auto lap = laplacian(f);
  for (std::size_t i = 0; i < g->node_count(); ++i) {
    const auto x = g->coord(i);
    EXPECT_NEAR(grad.at(i, 0), 2 + x[0] + 3 * x[1], 1e-11);
    EXPECT_NEAR(grad.at(i, 1), -1 + 3 * x[0], 1e-11);
    if (g->boundary_distance(i) >= 1) EXPECT_NEAR(lap[i], 1.0, 1e-10);
  }
}

TEST(Operators, SecondOrderConvergenceOnSmoothField) {
  std::vector<double> err;
  for (int n : {16, 32}) {
    auto g = StructuredGrid::cartesian(2, {0, 0, 0}, {1, 1, 0}, {n, n, 0});
    auto f = sample(g, [](const Point& x) { return std::sin(2 * x[0]) * std::cos(3 * x[1]); });
    const auto lap = laplacian(f);
    double e = 0;
    for (std::size_t i = 0; i < g->node_count(); ++i) {
      if (g->boundary_distance(i) < 1) continue;
      const auto x = g->coord(i);
      e = std::max(e, std::abs(lap[i] + 13 * std::sin(2 * x[0]) * std::cos(3 * x[1])));
    }
    err.push_back(e);
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 1.9);
}

TEST(Operators, VariationalLaplacianIsEnergyGradient) {
  for (auto g : {StructuredGrid::cartesian(2, {0, 0, 0}, {1, 1, 0}, {8, 9, 0}), StructuredGrid::radial(1.0, 12)}) {
    auto f = sample(g, [](const Point& x) { return std::sin(3 * x[0]) + x[1] * x[1]; });
    const auto vl = variational_laplacian(f);
    const double h = 1e-6;
    for (std::size_t i : {std::size_t{0}, std::size_t{3}, g->node_count() / 2}) {
      auto p = f, m = f;
      p.values()[i] += h;
      m.values()[i] -= h;
      const double dE = (discrete_dirichlet(p) - discrete_dirichlet(m)) / (2 * h);
      EXPECT_NEAR(-vl[i] * g->weights()[i], dE, 1e-6 * std::max(1.0, std::abs(dE)));
    }
  }
}

TEST(Operators, EdgeGradientSquareSumsToDirichletEnergy) {
  auto g = StructuredGrid::cartesian(3, {0, 0, 0}, {1, 1, 1}, {8, 9, 8});
  auto f = sample(g, [](const Point& x) { return x[0] * x[1] - x[2]; });
  const auto G = edge_gradient_sq(f);
  EXPECT_NEAR(integrate(g, G), 2 * discrete_dirichlet(f), 1e-12);
}

TEST(Operators, RadialDivergenceOfPositionIsThree) {
  auto g = StructuredGrid::radial(2.0, 40);
  VectorField v(g);
  for (std::size_t i = 0; i < g->node_count(); ++i) v.at(i, 0) = g->coord(i)[0];
  const auto d = divergence(v);
  for (std::size_t i = 1; i + 1 < g->node_count(); ++i) EXPECT_NEAR(d[i], 3.0, 1e-10);
}

TEST(Operators, IntegrateSecondOrder) {
  auto g = StructuredGrid::radial(1.0, 200);
  auto f = sample(g, [](const Point& x) { return x[0] * x[0]; });
  EXPECT_NEAR(integrate(f), 4 * std::numbers::pi / 5, 1e-4);
}

TEST(Interpolation, LinearFieldsReproducedAndResampled) {
  auto a = StructuredGrid::cartesian(2, {0, 0, 0}, {1, 1, 0}, {9, 11, 0});
  auto b = StructuredGrid::cartesian(2, {0, 0, 0}, {1, 1, 0}, {13, 8, 0});
  auto lin = [](const Point& x) { return 0.3 + 2 * x[0] - 1.5 * x[1]; };
  auto f = sample(a, lin);
  EXPECT_NEAR(interpolate(f, {0.37, 0.81, 0}), lin({0.37, 0.81, 0}), 1e-13);
  const auto r = resample(f, b);
  for (std::size_t i = 0; i < b->node_count(); ++i) EXPECT_NEAR(r[i], lin(b->coord(i)), 1e-13);
}

TEST(Field, MutationDropsExactAttachments) {
  auto g = StructuredGrid::cartesian(1, {0, 0, 0}, {1, 0, 0}, {8, 0, 0});
  ScalarField f(g, 1.0);
  f.attach_exact(std::vector<double>(9, 0.0), std::vector<double>(9, 0.0));
  EXPECT_TRUE(f.has_exact());
  f.values()[0] = 2.0;
  EXPECT_FALSE(f.has_exact());
  EXPECT_NE(field_hash(f.data()), field_hash(ScalarField(g, 1.0).data()));
}

TEST(Field, MismatchedGridsRejected) {
  auto a = StructuredGrid::cartesian(1, {0, 0, 0}, {1, 0, 0}, {8, 0, 0});
  auto b = StructuredGrid::cartesian(1, {0, 0, 0}, {1, 0, 0}, {9, 0, 0});
  EXPECT_THROW(require_same_grid(a, b), Error);
  EXPECT_NO_THROW(require_same_grid(a, StructuredGrid::cartesian(1, {0, 0, 0}, {1, 0, 0}, {8, 0, 0})));
}

TEST(FieldIO, BinaryRoundTripCarriesHash) {
  auto g = StructuredGrid::cartesian(2, {-1, 0, 0}, {1, 2, 0}, {8, 9, 0});
  auto f = sample(g, [](const Point& x) { return x[0] + 10 * x[1]; });
  const auto path = std::filesystem::temp_directory_path() / "solvate_test_field.bin";
  write_field_binary(f, path, 0xabcdef0123456789ull);
  const auto b = read_field_binary(path);
  std::filesystem::remove(path);
  EXPECT_EQ(b.config_hash, 0xabcdef0123456789ull);
  EXPECT_EQ(b.dim, 2);
  EXPECT_EQ(b.counts[0], 9u);
  EXPECT_EQ(b.counts[1], 10u);
  EXPECT_DOUBLE_EQ(b.hi[1], 2.0);
  ASSERT_EQ(b.data.size(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(b.data[i], f[i]);
}

TEST(Shape, BallMeasuresAndSurfaceQuadrature) {
  auto disk = InterfaceShape::ball({0.1, -0.2, 0}, 0.6);
  auto g2 = StructuredGrid::cartesian(2, {-1, -1, 0}, {1, 1, 0}, {32, 32, 0});
  EXPECT_NEAR(disk.perimeter(*g2), 2 * std::numbers::pi * 0.6, 1e-12);
  EXPECT_NEAR(disk.enclosed_volume(*g2), std::numbers::pi * 0.36, 1e-12);
  EXPECT_NEAR(surface_integral(disk, *g2, [](const Point&, const Point&) { return 1.0; }), 2 * std::numbers::pi * 0.6,
              1e-9);
  // divergence theorem: int x . nu dS = dim |G|
  EXPECT_NEAR(surface_integral(disk, *g2,
                               [](const Point& x, const Point& n) { return (x[0] - 0.1) * n[0] + (x[1] + 0.2) * n[1]; }),
              2 * std::numbers::pi * 0.36, 1e-9);
  auto ball = InterfaceShape::ball({0, 0, 0}, 1.5);
  auto r = StructuredGrid::radial(3.0, 10);
  EXPECT_NEAR(ball.perimeter(*r), 4 * std::numbers::pi * 2.25, 1e-12);
  EXPECT_NEAR(ball.mean_curvature(), 1 / 1.5, 1e-15);
  EXPECT_NEAR(ball.signed_distance({0.5, 0, 0}), 1.0, 1e-15);
  EXPECT_NEAR(ball.distance_laplacian({1, 0, 0}, 3), -2.0, 1e-15);
}

TEST(Shape, PlaneAndDomainChecks) {
  auto g = StructuredGrid::cartesian(2, {-1, 0, 0}, {1, 1, 0}, {8, 8, 0});
  auto p = InterfaceShape::plane({1, 0, 0}, 0.25);
  EXPECT_NEAR(p.perimeter(*g), 1.0, 1e-14);
  EXPECT_NEAR(p.enclosed_volume(*g), 1.25, 1e-14);
  EXPECT_TRUE(p.contains({0, 0.5, 0}));
  EXPECT_FALSE(p.contains({0.5, 0.5, 0}));
  EXPECT_NEAR(p.inside_fraction({0, 0.5, 0}, {0.5, 0.5, 0}), 0.5, 1e-14);
  EXPECT_THROW(InterfaceShape::ball({0.9, 0.5, 0}, 0.3).check_domain(*g), Error);
  EXPECT_THROW(InterfaceShape::ball({0, 0, 0}, -1.0), Error);
}
