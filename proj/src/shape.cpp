#include "solvate/shape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "solvate/errors.hpp"
#include "solvate/quadrature.hpp"

namespace solvate {

namespace {

constexpr double kPi = std::numbers::pi;

double dot3(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Point unit(const Point& n) {
  const double len = std::sqrt(dot3(n, n));
  if (!(len > 0)) throw ShapeError("plane normal must be nonzero");
  return {n[0] / len, n[1] / len, n[2] / len};
}

int axis_of(const Point& n, double& sign) {
  for (int k = 0; k < 3; ++k) {
    if (std::abs(std::abs(n[k]) - 1.0) < 1e-14) {
      sign = n[k] > 0 ? 1.0 : -1.0;
      return k;
    }
  }
  sign = 1.0;
  return -1;
}

}  // namespace

InterfaceShape InterfaceShape::plane(const Point& normal, double offset) {
  InterfaceShape s;
  s.kind_ = ShapeKind::plane;
  s.normal_ = unit(normal);
  s.offset_ = offset;
  s.axis_ = axis_of(s.normal_, s.sign_);
  return s;
}

InterfaceShape InterfaceShape::slab(const Point& normal, double lower, double upper) {
  if (!(upper > lower)) throw ShapeError("slab needs lower < upper");
  InterfaceShape s;
  s.kind_ = ShapeKind::slab;
  s.normal_ = unit(normal);
  s.offset_ = lower;
  s.upper_ = upper;
  s.axis_ = axis_of(s.normal_, s.sign_);
  return s;
}

InterfaceShape InterfaceShape::ball(const Point& center, double radius) {
  if (!(radius > 0)) throw ShapeError("ball radius must be positive");
  InterfaceShape s;
  s.kind_ = ShapeKind::ball;
  s.center_ = center;
  s.radius_ = radius;
  return s;
}

double InterfaceShape::signed_distance(const Point& x) const {
  switch (kind_) {
    case ShapeKind::plane:
      return offset_ - dot3(normal_, x);
    case ShapeKind::slab: {
      const double t = dot3(normal_, x);
      return std::min(t - offset_, upper_ - t);
    }
    case ShapeKind::ball:
    default:
      return radius_ - distance(x, center_);
  }
}

Point InterfaceShape::distance_gradient(const Point& x) const {
  switch (kind_) {
    case ShapeKind::plane:
      return {-normal_[0], -normal_[1], -normal_[2]};
    case ShapeKind::slab: {
      const double t = dot3(normal_, x);
      const double mid = 0.5 * (offset_ + upper_);
      if (t == mid) return {0, 0, 0};
      const double s = t < mid ? 1.0 : -1.0;
      return {s * normal_[0], s * normal_[1], s * normal_[2]};
    }
    case ShapeKind::ball:
    default: {
      const double r = distance(x, center_);
      if (r == 0.0) return {0, 0, 0};
      return {-(x[0] - center_[0]) / r, -(x[1] - center_[1]) / r, -(x[2] - center_[2]) / r};
    }
  }
}

double InterfaceShape::distance_laplacian(const Point& x, int dim) const {
  if (kind_ != ShapeKind::ball) return 0.0;
  const double r = distance(x, center_);
  if (r == 0.0) return 0.0;
  return -(dim - 1) / r;
}

Point InterfaceShape::normal(const Point& x) const {
  const auto g = distance_gradient(x);
  return {-g[0], -g[1], -g[2]};
}

double InterfaceShape::mean_curvature() const { return kind_ == ShapeKind::ball ? 1.0 / radius_ : 0.0; }

void InterfaceShape::check_domain(const StructuredGrid& grid) const {
  if (grid.is_radial()) {
    if (kind_ != ShapeKind::ball) throw ShapeError("radial grids support ball shapes only");
    if (distance(center_, {0, 0, 0}) != 0.0) throw ShapeError("radial grids need the ball centred at the origin");
    if (!(radius_ < grid.hi(0))) throw ShapeError("ball is not interior to the radial domain");
    return;
  }
  if (kind_ == ShapeKind::ball) {
    for (int d = 0; d < grid.dim(); ++d)
      if (!(center_[d] - radius_ > grid.lo(d) && center_[d] + radius_ < grid.hi(d)))
        throw ShapeError(fmt::format("ball of radius {} is not interior to the domain", radius_));
    for (int d = grid.dim(); d < 3; ++d)
      if (center_[d] != 0.0) throw ShapeError("ball center has a coordinate outside the grid dimension");
    return;
  }
  if (axis_ < 0 || axis_ >= grid.dim()) throw ShapeError("planes must be axis aligned within the grid dimension");
}

double InterfaceShape::perimeter(const StructuredGrid& grid) const {
  check_domain(grid);
  if (kind_ == ShapeKind::ball) {
    if (grid.is_radial() || grid.dim() == 3) return 4.0 * kPi * radius_ * radius_;
    if (grid.dim() == 2) return 2.0 * kPi * radius_;
    return 2.0;
  }
  double cross = 1.0;
  for (int d = 0; d < grid.dim(); ++d)
    if (d != axis_) cross *= grid.hi(d) - grid.lo(d);
  auto crossing_inside = [&](double c) {
    const double coord = sign_ * c;
    return coord > grid.lo(axis_) && coord < grid.hi(axis_);
  };
  double total = 0.0;
  if (crossing_inside(offset_)) total += cross;
  if (kind_ == ShapeKind::slab && crossing_inside(upper_)) total += cross;
  return total;
}

double InterfaceShape::enclosed_volume(const StructuredGrid& grid) const {
  check_domain(grid);
  if (kind_ == ShapeKind::ball) {
    if (grid.is_radial() || grid.dim() == 3) return 4.0 * kPi * radius_ * radius_ * radius_ / 3.0;
    if (grid.dim() == 2) return kPi * radius_ * radius_;
    return 2.0 * radius_;
  }
  double cross = 1.0;
  for (int d = 0; d < grid.dim(); ++d)
    if (d != axis_) cross *= grid.hi(d) - grid.lo(d);
  const double lo = grid.lo(axis_), hi = grid.hi(axis_);
  // measure of {t in [lo, hi] : a < sign * t < b}
  auto interval = [&](double a, double b) {
    double tlo, thi;
    if (sign_ > 0) {
      tlo = a;
      thi = b;
    } else {
      tlo = -b;
      thi = -a;
    }
    return std::max(0.0, std::min(thi, hi) - std::max(tlo, lo));
  };
  if (kind_ == ShapeKind::plane) return cross * interval(-1e300, offset_);
  return cross * interval(offset_, upper_);
}

std::vector<SurfaceNode> InterfaceShape::surface_nodes(const StructuredGrid& grid, int level) const {
  check_domain(grid);
  std::vector<SurfaceNode> out;
  const int refine = 1 << level;
  if (kind_ == ShapeKind::ball) {
    if (grid.is_radial()) {
      out.push_back({{radius_, 0, 0}, {1, 0, 0}, 4.0 * kPi * radius_ * radius_});
      return out;
    }
    const Point& c = center_;
    if (grid.dim() == 1) {
      out.push_back({{c[0] + radius_, 0, 0}, {1, 0, 0}, 1.0});
      out.push_back({{c[0] - radius_, 0, 0}, {-1, 0, 0}, 1.0});
      return out;
    }
    const int m = 64 * refine;
    if (grid.dim() == 2) {
      for (int k = 0; k < m; ++k) {
        const double t = 2.0 * kPi * k / m;
        const Point n{std::cos(t), std::sin(t), 0.0};
        out.push_back({{c[0] + radius_ * n[0], c[1] + radius_ * n[1], 0.0}, n, 2.0 * kPi * radius_ / m});
      }
      return out;
    }
    for (const auto& q : gauss_legendre(0.0, kPi, 4 * refine)) {
      const double st = std::sin(q.x), ct = std::cos(q.x);
      for (int k = 0; k < m; ++k) {
        const double p = 2.0 * kPi * k / m;
        const Point n{st * std::cos(p), st * std::sin(p), ct};
        out.push_back({{c[0] + radius_ * n[0], c[1] + radius_ * n[1], c[2] + radius_ * n[2]}, n,
                       radius_ * radius_ * st * q.w * 2.0 * kPi / m});
      }
    }
    return out;
  }

  auto add_plane = [&](double c, double nsign) {
    const double coord = sign_ * c;
    if (!(coord > grid.lo(axis_) && coord < grid.hi(axis_))) return;
    Point n{0, 0, 0};
    n[axis_] = nsign * sign_;
    std::vector<int> others;
    for (int d = 0; d < grid.dim(); ++d)
      if (d != axis_) others.push_back(d);
    std::vector<std::vector<QuadNode>> rules;
    for (int d : others) rules.push_back(gauss_legendre(grid.lo(d), grid.hi(d), 4 * refine));
    if (others.empty()) {
      Point x{0, 0, 0};
      x[axis_] = coord;
      out.push_back({x, n, 1.0});
      return;
    }
    if (others.size() == 1) {
      for (const auto& a : rules[0]) {
        Point x{0, 0, 0};
        x[axis_] = coord;
        x[others[0]] = a.x;
        out.push_back({x, n, a.w});
      }
      return;
    }
    for (const auto& a : rules[0])
      for (const auto& b : rules[1]) {
        Point x{0, 0, 0};
        x[axis_] = coord;
        x[others[0]] = a.x;
        x[others[1]] = b.x;
        out.push_back({x, n, a.w * b.w});
      }
  };
  if (kind_ == ShapeKind::plane) {
    add_plane(offset_, 1.0);
  } else {
    add_plane(offset_, -1.0);
    add_plane(upper_, 1.0);
  }
  return out;
}

double InterfaceShape::inside_fraction(const Point& a, const Point& b) const {
  const double da = signed_distance(a), db = signed_distance(b);
  const bool ia = da > 0, ib = db > 0;
  if (ia == ib) return ia ? 1.0 : 0.0;
  double lo = 0.0, hi = 1.0;  // d(lo) has the sign of da
  for (int it = 0; it < 80; ++it) {
    const double t = 0.5 * (lo + hi);
    const Point x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
    if ((signed_distance(x) > 0) == ia)
      lo = t;
    else
      hi = t;
  }
  const double t = 0.5 * (lo + hi);
  return ia ? t : 1.0 - t;
}

std::string InterfaceShape::describe() const {
  switch (kind_) {
    case ShapeKind::plane:
      return fmt::format("plane n=({}, {}, {}) offset {}", normal_[0], normal_[1], normal_[2], offset_);
    case ShapeKind::slab:
      return fmt::format("slab n=({}, {}, {}) [{}, {}]", normal_[0], normal_[1], normal_[2], offset_, upper_);
    case ShapeKind::ball:
    default:
      return fmt::format("ball center=({}, {}, {}) R={}", center_[0], center_[1], center_[2], radius_);
  }
}

double surface_integral(const InterfaceShape& shape, const StructuredGrid& grid, const SurfaceIntegrand& f,
                        double tol) {
  auto at_level = [&](int level) {
    double s = 0.0;
    for (const auto& n : shape.surface_nodes(grid, level)) s += n.weight * f(n.x, n.normal);
    return s;
  };
  double prev = at_level(0);
  if (grid.is_radial() || grid.dim() == 1) return prev;
  for (int level = 1; level <= 6; ++level) {
    const double cur = at_level(level);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

ScalarField signed_distance_field(const InterfaceShape& shape, const GridPtr& grid) {
  ScalarField out(grid);
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = shape.signed_distance(grid->coord(i));
  return out;
}

}  // namespace solvate
