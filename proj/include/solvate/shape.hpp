#pragma once

// Analytic sharp interfaces. G is the solute region; the signed distance is
// positive inside G and the unit normal points out of G.

#include <functional>
#include <string>
#include <vector>

#include "solvate/grid.hpp"

namespace solvate {

enum class ShapeKind { plane, slab, ball };

struct SurfaceNode {
  Point x{0, 0, 0};
  Point normal{0, 0, 0};
  double weight = 0.0;
};

class InterfaceShape {
 public:
  /// G = {n . x < offset}.
  static InterfaceShape plane(const Point& normal, double offset);
  /// G = {lower < n . x < upper}.
  static InterfaceShape slab(const Point& normal, double lower, double upper);
  static InterfaceShape ball(const Point& center, double radius);

  ShapeKind kind() const { return kind_; }
  const Point& center() const { return center_; }
  double radius() const { return radius_; }
  const Point& plane_normal() const { return normal_; }
  double offset() const { return offset_; }
  double upper() const { return upper_; }

  double signed_distance(const Point& x) const;
  /// grad d; zero at the ball center and on the slab mid-plane.
  Point distance_gradient(const Point& x) const;
  /// Laplacian of d in `dim` dimensions (ball: -(dim-1)/r).
  double distance_laplacian(const Point& x, int dim) const;
  Point normal(const Point& x) const;
  /// Average of the principal curvatures, positive for convex G.
  double mean_curvature() const;
  bool contains(const Point& x) const { return signed_distance(x) > 0.0; }

  /// Ball strictly inside the box (or below rmax); planes must be axis aligned.
  void check_domain(const StructuredGrid& grid) const;
  /// Area of the part of dG inside the domain.
  double perimeter(const StructuredGrid& grid) const;
  /// Measure of G inside the domain.
  double enclosed_volume(const StructuredGrid& grid) const;
  /// Surface quadrature nodes; refinement grows with `level`.
  std::vector<SurfaceNode> surface_nodes(const StructuredGrid& grid, int level) const;
  /// Fraction of the segment a -> b lying inside G.
  double inside_fraction(const Point& a, const Point& b) const;

  std::string describe() const;

 private:
  ShapeKind kind_ = ShapeKind::ball;
  Point center_{0, 0, 0};
  double radius_ = 1.0;
  Point normal_{1, 0, 0};
  double offset_ = 0.0;
  double upper_ = 0.0;
  int axis_ = 0;       // axis of an axis-aligned plane normal, -1 otherwise
  double sign_ = 1.0;  // normal = sign * e_axis
};

using SurfaceIntegrand = std::function<double(const Point& x, const Point& normal)>;

/// Integral over dG, refined until successive levels agree to `tol` (relative).
double surface_integral(const InterfaceShape& shape, const StructuredGrid& grid, const SurfaceIntegrand& f,
                        double tol = 1e-10);

ScalarField signed_distance_field(const InterfaceShape& shape, const GridPtr& grid);

}  // namespace solvate
