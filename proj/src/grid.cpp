#include "solvate/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include <fmt/format.h>

#include "solvate/errors.hpp"

namespace solvate {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// 4 pi * integral over [a, b] of hat(r) r^2 dr where the hat is 1 at `at_b ? b : a`
// and 0 at the other end. Three-point Gauss-Legendre is exact for the cubic.
double hat_moment(double a, double b, bool at_b) {
  static const double xs[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double ws[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double r = mid + half * xs[q];
    const double t = (r - a) / (b - a);
    s += ws[q] * (at_b ? t : 1.0 - t) * r * r;
  }
  return kFourPi * half * s;
}

double trapezoid_weight(int i, int n, double h) { return (i == 0 || i == n - 1) ? 0.5 * h : h; }

}  // namespace

GridPtr StructuredGrid::cartesian(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                                  const std::array<int, 3>& cells) {
  if (dim < 1 || dim > 3) throw ShapeError(fmt::format("grid dimension {} not in {{1,2,3}}", dim));
  auto g = std::shared_ptr<StructuredGrid>(new StructuredGrid());
  g->dim_ = dim;
  for (int d = 0; d < 3; ++d) {
    if (d < dim) {
      if (cells[d] < 8) throw ShapeError(fmt::format("axis {} has {} cells; at least 8 required", d, cells[d]));
      if (!(hi[d] > lo[d])) throw ShapeError(fmt::format("axis {} has empty extent", d));
      g->lo_[d] = lo[d];
      g->hi_[d] = hi[d];
      g->cells_[d] = cells[d];
      g->h_[d] = (hi[d] - lo[d]) / cells[d];
    } else {
      g->cells_[d] = 0;
    }
  }
  g->build();
  return g;
}

GridPtr StructuredGrid::radial(double rmax, int cells) {
  if (cells < 8) throw ShapeError(fmt::format("radial grid has {} cells; at least 8 required", cells));
  if (!(rmax > 0)) throw ShapeError("radial grid needs rmax > 0");
  auto g = std::shared_ptr<StructuredGrid>(new StructuredGrid());
  g->dim_ = 1;
  g->radial_ = true;
  g->lo_ = {0.0, 0.0, 0.0};
  g->hi_ = {rmax, 0.0, 0.0};
  g->cells_ = {cells, 0, 0};
  g->h_[0] = rmax / cells;
  g->build();
  return g;
}

void StructuredGrid::build() {
  stride_[0] = 1;
  stride_[1] = static_cast<std::size_t>(nodes(0));
  stride_[2] = stride_[1] * static_cast<std::size_t>(nodes(1));
  count_ = stride_[2] * static_cast<std::size_t>(nodes(2));

  weights_.assign(count_, 0.0);
  boundary_.assign(count_, 0);
  edges_.clear();

  if (radial_) {
    const int n = nodes(0);
    const double h = h_[0];
    for (int i = 0; i < n; ++i) {
      const double r = i * h;
      double w = 0.0;
      if (i > 0) w += hat_moment(r - h, r, true);
      if (i < n - 1) w += hat_moment(r, r + h, false);
      weights_[i] = w;
    }
    boundary_[n - 1] = 1;
    edges_.reserve(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
      const double a = i * h, b = a + h;
      Edge e;
      e.i = i;
      e.j = i + 1;
      e.axis = 0;
      e.h = h;
      e.share_i = hat_moment(a, b, false);
      e.share_j = hat_moment(a, b, true);
      e.volume = e.share_i + e.share_j;
      edges_.push_back(e);
    }
    return;
  }

  for (std::size_t idx = 0; idx < count_; ++idx) {
    const auto m = multi_index(idx);
    double w = 1.0;
    bool bnd = false;
    for (int d = 0; d < dim_; ++d) {
      w *= trapezoid_weight(m[d], nodes(d), h_[d]);
      if (m[d] == 0 || m[d] == nodes(d) - 1) bnd = true;
    }
    weights_[idx] = w;
    boundary_[idx] = bnd ? 1 : 0;
  }
  for (int d = 0; d < dim_; ++d) {
    for (std::size_t idx = 0; idx < count_; ++idx) {
      const auto m = multi_index(idx);
      if (m[d] == nodes(d) - 1) continue;
      double transverse = 1.0;
      for (int e = 0; e < dim_; ++e)
        if (e != d) transverse *= trapezoid_weight(m[e], nodes(e), h_[e]);
      Edge edge;
      edge.i = idx;
      edge.j = idx + stride_[d];
      edge.axis = d;
      edge.h = h_[d];
      edge.volume = h_[d] * transverse;
      edge.share_i = 0.5 * edge.volume;
      edge.share_j = 0.5 * edge.volume;
      edges_.push_back(edge);
    }
  }
}

double StructuredGrid::max_h() const {
  double m = 0.0;
  for (int d = 0; d < dim_; ++d) m = std::max(m, h_[d]);
  return m;
}

std::array<int, 3> StructuredGrid::multi_index(std::size_t idx) const {
  std::array<int, 3> m{0, 0, 0};
  m[2] = static_cast<int>(idx / stride_[2]);
  idx -= m[2] * stride_[2];
  m[1] = static_cast<int>(idx / stride_[1]);
  m[0] = static_cast<int>(idx - m[1] * stride_[1]);
  return m;
}

Point StructuredGrid::coord(std::size_t idx) const {
  const auto m = multi_index(idx);
  Point p{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) p[d] = lo_[d] + m[d] * h_[d];
  return p;
}

int StructuredGrid::boundary_distance(std::size_t idx) const {
  const auto m = multi_index(idx);
  if (radial_) return nodes(0) - 1 - m[0];
  int dist = 1 << 30;
  for (int d = 0; d < dim_; ++d) dist = std::min({dist, m[d], nodes(d) - 1 - m[d]});
  return dist;
}

double StructuredGrid::measure() const {
  if (radial_) return kFourPi * hi_[0] * hi_[0] * hi_[0] / 3.0;
  double v = 1.0;
  for (int d = 0; d < dim_; ++d) v *= hi_[d] - lo_[d];
  return v;
}

bool StructuredGrid::same_as(const StructuredGrid& o) const {
  return dim_ == o.dim_ && radial_ == o.radial_ && lo_ == o.lo_ && hi_ == o.hi_ && cells_ == o.cells_;
}

std::string StructuredGrid::describe() const {
  if (radial_) return fmt::format("radial r in [0, {}] cells {} h {}", hi_[0], cells_[0], h_[0]);
  std::string s = fmt::format("cartesian dim {}", dim_);
  for (int d = 0; d < dim_; ++d) s += fmt::format(" [{}, {}]x{}", lo_[d], hi_[d], cells_[d]);
  return s;
}

// ---- fields --------------------------------------------------------------

ScalarField::ScalarField(GridPtr grid, double fill) : grid_(std::move(grid)) {
  v_.assign(grid_->node_count(), fill);
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
  if (v_.size() != grid_->node_count()) throw ShapeError("field length does not match grid node count");
}

std::vector<double>& ScalarField::values() {
  exact_grad_.reset();
  exact_lap_.reset();
  return v_;
}

void ScalarField::attach_exact(std::vector<double> gradient, std::vector<double> laplacian) {
  if (gradient.size() != v_.size() * grid_->vector_components() || laplacian.size() != v_.size())
    throw ShapeError("exact derivative attachment has the wrong length");
  exact_grad_ = std::move(gradient);
  exact_lap_ = std::move(laplacian);
}

bool ScalarField::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

VectorField::VectorField(GridPtr grid) : grid_(std::move(grid)) {
  nc_ = grid_->vector_components();
  v_.assign(grid_->node_count() * nc_, 0.0);
}

TensorField::TensorField(GridPtr grid) : grid_(std::move(grid)) {
  nc_ = grid_->tensor_components();
  v_.assign(grid_->node_count() * nc_, 0.0);
}

double TensorField::entry(std::size_t node, int i, int j) const {
  if (grid_->is_radial()) {
    if (i != 0 || j != 0) throw ShapeError("radial tensors expose only the rr entry by index");
    return at(node, 0);
  }
  return at(node, i * grid_->dim() + j);
}

// ---- operators -----------------------------------------------------------

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b) throw ShapeError("field is not attached to a grid");
  if (a != b && !a->same_as(*b)) throw ShapeError("fields live on different grids");
}

namespace {

// First derivative of node data along `axis` at node idx.
double d1(const std::vector<double>& f, const StructuredGrid& g, std::size_t idx, int axis, int comp = 0,
          int ncomp = 1) {
  const int i = g.multi_index(idx)[axis];
  const int n = g.nodes(axis);
  const std::size_t s = g.stride(axis);
  const double h = g.h(axis);
  auto v = [&](std::size_t k) { return f[k * ncomp + comp]; };
  if (i > 0 && i < n - 1) return (v(idx + s) - v(idx - s)) / (2.0 * h);
  if (i == 0) return (-3.0 * v(idx) + 4.0 * v(idx + s) - v(idx + 2 * s)) / (2.0 * h);
  return (3.0 * v(idx) - 4.0 * v(idx - s) + v(idx - 2 * s)) / (2.0 * h);
}

double d2(const std::vector<double>& f, const StructuredGrid& g, std::size_t idx, int axis) {
  const int i = g.multi_index(idx)[axis];
  const int n = g.nodes(axis);
  const std::size_t s = g.stride(axis);
  const double h2 = g.h(axis) * g.h(axis);
  if (i > 0 && i < n - 1) return (f[idx + s] - 2.0 * f[idx] + f[idx - s]) / h2;
  if (i == 0) return (2.0 * f[idx] - 5.0 * f[idx + s] + 4.0 * f[idx + 2 * s] - f[idx + 3 * s]) / h2;
  return (2.0 * f[idx] - 5.0 * f[idx - s] + 4.0 * f[idx - 2 * s] - f[idx - 3 * s]) / h2;
}

}  // namespace

VectorField gradient(const ScalarField& f) {
  const auto& g = *f.grid();
  VectorField out(f.grid());
  const auto& v = f.data();
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    if (g.is_radial()) {
      out.at(idx, 0) = idx == 0 ? 0.0 : d1(v, g, idx, 0);
    } else {
      for (int d = 0; d < g.dim(); ++d) out.at(idx, d) = d1(v, g, idx, d);
    }
  }
  return out;
}

ScalarField divergence(const VectorField& vf) {
  const auto& g = *vf.grid();
  ScalarField out(vf.grid());
  auto& o = out.values();
  const auto& v = vf.data();
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    if (g.is_radial()) {
      if (idx == 0) {
        o[idx] = 3.0 * v[1] / g.h(0);
      } else {
        const double r = g.coord(idx)[0];
        o[idx] = d1(v, g, idx, 0) + 2.0 * v[idx] / r;
      }
    } else {
      double s = 0.0;
      for (int d = 0; d < g.dim(); ++d) s += d1(v, g, idx, d, d, g.dim());
      o[idx] = s;
    }
  }
  return out;
}

VectorField tensor_divergence(const TensorField& t) {
  const auto& g = *t.grid();
  VectorField out(t.grid());
  const auto& v = t.data();
  const int n = g.dim();
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    if (g.is_radial()) {
      if (idx == 0) {
        out.at(idx, 0) = 0.0;
      } else {
        const double r = g.coord(idx)[0];
        out.at(idx, 0) = d1(v, g, idx, 0, 0, 2) + 2.0 * (v[idx * 2] - v[idx * 2 + 1]) / r;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += d1(v, g, idx, j, i * n + j, n * n);
        out.at(idx, i) = s;
      }
    }
  }
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  const auto& g = *f.grid();
  ScalarField out(f.grid());
  auto& o = out.values();
  const auto& v = f.data();
  for (std::size_t idx = 0; idx < g.node_count(); ++idx) {
    if (g.is_radial()) {
      const double h = g.h(0);
      if (idx == 0) {
        o[idx] = 6.0 * (v[1] - v[0]) / (h * h);
      } else {
        const double r = g.coord(idx)[0];
        o[idx] = d2(v, g, idx, 0) + 2.0 * d1(v, g, idx, 0) / r;
      }
    } else {
      double s = 0.0;
      for (int d = 0; d < g.dim(); ++d) s += d2(v, g, idx, d);
      o[idx] = s;
    }
  }
  return out;
}

ScalarField variational_laplacian(const ScalarField& f) {
  const auto& g = *f.grid();
  ScalarField out(f.grid());
  auto& o = out.values();
  const auto& v = f.data();
  for (const auto& e : g.edges()) {
    const double flux = e.volume * (v[e.j] - v[e.i]) / (e.h * e.h);
    o[e.i] += flux;
    o[e.j] -= flux;
  }
  const auto& w = g.weights();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] /= w[i];
  return out;
}

std::vector<double> edge_gradient_sq(const ScalarField& f) {
  const auto& g = *f.grid();
  std::vector<double> out(g.node_count(), 0.0);
  const auto& v = f.data();
  for (const auto& e : g.edges()) {
    const double s = (v[e.j] - v[e.i]) / e.h;
    out[e.i] += s * s * e.share_i;
    out[e.j] += s * s * e.share_j;
  }
  const auto& w = g.weights();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= w[i];
  return out;
}

std::vector<double> gradient_sq(const ScalarField& f) {
  if (!f.has_exact()) return edge_gradient_sq(f);
  const int nc = f.grid()->vector_components();
  const auto& gr = f.exact_gradient();
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c = 0; c < nc; ++c) out[i] += gr[i * nc + c] * gr[i * nc + c];
  return out;
}

double integrate(const GridPtr& grid, const std::vector<double>& values) {
  const auto& w = grid->weights();
  if (values.size() != w.size()) throw ShapeError("integrand length does not match grid");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * values[i];
  return s;
}

double integrate(const ScalarField& f) { return integrate(f.grid(), f.data()); }

std::vector<double> contract(const TensorField& t, const TensorField& s) {
  require_same_grid(t.grid(), s.grid());
  const auto& g = *t.grid();
  std::vector<double> out(g.node_count(), 0.0);
  const int nc = t.components();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (g.is_radial()) {
      out[i] = t.at(i, 0) * s.at(i, 0) + 2.0 * t.at(i, 1) * s.at(i, 1);
    } else {
      double acc = 0.0;
      for (int c = 0; c < nc; ++c) acc += t.at(i, c) * s.at(i, c);
      out[i] = acc;
    }
  }
  return out;
}

std::vector<double> dot(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid());
  std::vector<double> out(a.grid()->node_count(), 0.0);
  const int nc = a.components();
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c = 0; c < nc; ++c) out[i] += a.at(i, c) * b.at(i, c);
  return out;
}

double interpolate(const ScalarField& f, const Point& x) {
  const auto& g = *f.grid();
  const auto& v = f.data();
  if (g.is_radial()) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double s = std::clamp(r / g.h(0), 0.0, static_cast<double>(g.cells(0)));
    const int i = std::min(static_cast<int>(s), g.cells(0) - 1);
    const double t = s - i;
    return (1.0 - t) * v[i] + t * v[i + 1];
  }
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int d = 0; d < g.dim(); ++d) {
    const double s = std::clamp((x[d] - g.lo(d)) / g.h(d), 0.0, static_cast<double>(g.cells(d)));
    base[d] = std::min(static_cast<int>(s), g.cells(d) - 1);
    frac[d] = s - base[d];
  }
  double acc = 0.0;
  const int corners = 1 << g.dim();
  for (int c = 0; c < corners; ++c) {
    double wgt = 1.0;
    std::array<int, 3> m = base;
    for (int d = 0; d < g.dim(); ++d) {
      const int bit = (c >> d) & 1;
      m[d] += bit;
      wgt *= bit ? frac[d] : 1.0 - frac[d];
    }
    if (wgt != 0.0) acc += wgt * v[g.index(m[0], m[1], m[2])];
  }
  return acc;
}

ScalarField resample(const ScalarField& f, const GridPtr& target) {
  if (target->is_radial() != f.grid()->is_radial() || target->dim() != f.grid()->dim())
    throw ShapeError("resample needs grids of the same kind and dimension");
  ScalarField out(target);
  auto& o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = interpolate(f, target->coord(i));
  return out;
}

std::uint64_t field_hash(const std::vector<double>& values) {
  std::uint64_t h = 14695981039346656037ULL;
  for (double x : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &x, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace solvate
