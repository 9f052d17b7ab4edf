#pragma once

// Node-centred uniform grids (1D/2D/3D Cartesian, or 1D radial with r^2 dr
// measure), node fields and finite-difference operators.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "solvate/model.hpp"

namespace solvate {

/// Grid edge between neighbouring nodes i < j along `axis`.
/// `volume` is the measure attributed to the edge and `share_i + share_j == volume`.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  int axis = 0;
  double h = 0.0;
  double volume = 0.0;
  double share_i = 0.0;
  double share_j = 0.0;
};

class StructuredGrid;
using GridPtr = std::shared_ptr<const StructuredGrid>;

class StructuredGrid {
 public:
  static GridPtr cartesian(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                           const std::array<int, 3>& cells);
  /// Radial grid on [0, rmax]; spherical symmetry about the origin.
  static GridPtr radial(double rmax, int cells);

  int dim() const { return dim_; }
  bool is_radial() const { return radial_; }
  int cells(int axis) const { return cells_[axis]; }
  int nodes(int axis) const { return cells_[axis] + 1; }
  double h(int axis) const { return h_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double max_h() const;
  std::size_t node_count() const { return count_; }

  std::size_t index(int i, int j = 0, int k = 0) const {
    return static_cast<std::size_t>(i) + stride_[1] * j + stride_[2] * k;
  }
  std::array<int, 3> multi_index(std::size_t idx) const;
  std::size_t stride(int axis) const { return stride_[axis]; }

  /// Physical coordinates; radial nodes map to (r, 0, 0).
  Point coord(std::size_t idx) const;
  /// Dirichlet nodes: every box face for Cartesian grids, r = rmax for radial.
  bool on_boundary(std::size_t idx) const { return boundary_[idx] != 0; }
  /// Number of nodes between idx and the nearest box face (0 on the face).
  int boundary_distance(std::size_t idx) const;

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Components of a vector (radial: 1) and of a tensor (radial: [rr, tt]).
  int vector_components() const { return radial_ ? 1 : dim_; }
  int tensor_components() const { return radial_ ? 2 : dim_ * dim_; }

  /// Total measure of the domain (box volume, or ball volume when radial).
  double measure() const;

  bool same_as(const StructuredGrid& other) const;
  std::string describe() const;

 private:
  StructuredGrid() = default;
  void build();

  int dim_ = 1;
  bool radial_ = false;
  std::array<double, 3> lo_{0, 0, 0};
  std::array<double, 3> hi_{0, 0, 0};
  std::array<int, 3> cells_{0, 0, 0};
  std::array<double, 3> h_{1, 1, 1};
  std::array<std::size_t, 3> stride_{1, 1, 1};
  std::size_t count_ = 0;
  std::vector<double> weights_;
  std::vector<Edge> edges_;
  std::vector<char> boundary_;
};

/// Node values of a scalar. Lifted analytic fields may also carry their exact
/// gradient and Laplacian; any modification through `values()` drops them.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double fill = 0.0);
  ScalarField(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& data() const { return v_; }
  /// Mutable access; invalidates the exact derivative attachments.
  std::vector<double>& values();

  void attach_exact(std::vector<double> gradient, std::vector<double> laplacian);
  bool has_exact() const { return exact_grad_.has_value(); }
  const std::vector<double>& exact_gradient() const { return *exact_grad_; }
  const std::vector<double>& exact_laplacian() const { return *exact_lap_; }

  bool under_resolved() const { return under_resolved_; }
  void set_under_resolved(bool flag) { under_resolved_ = flag; }

  bool all_finite() const;
  double max_abs() const;

 private:
  GridPtr grid_;
  std::vector<double> v_;
  std::optional<std::vector<double>> exact_grad_;
  std::optional<std::vector<double>> exact_lap_;
  bool under_resolved_ = false;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid);
  const GridPtr& grid() const { return grid_; }
  int components() const { return nc_; }
  double& at(std::size_t node, int c) { return v_[node * nc_ + c]; }
  double at(std::size_t node, int c) const { return v_[node * nc_ + c]; }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

 private:
  GridPtr grid_;
  int nc_ = 0;
  std::vector<double> v_;
};

/// Cartesian: row-major n x n per node. Radial: [rr, tt] so that
/// T = T_rr x^ (x) x^ + T_tt (I - x^ (x) x^).
class TensorField {
 public:
  TensorField() = default;
  explicit TensorField(GridPtr grid);
  const GridPtr& grid() const { return grid_; }
  int components() const { return nc_; }
  double& at(std::size_t node, int c) { return v_[node * nc_ + c]; }
  double at(std::size_t node, int c) const { return v_[node * nc_ + c]; }
  /// Cartesian entry T_ij; radial grids accept (0,0) -> rr only.
  double entry(std::size_t node, int i, int j) const;
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

 private:
  GridPtr grid_;
  int nc_ = 0;
  std::vector<double> v_;
};

// ---- operators ---------------------------------------------------------

void require_same_grid(const GridPtr& a, const GridPtr& b);

/// Second-order central differences, one-sided second order at faces.
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// Row-wise divergence (div T)_i = d_j T_ij.
VectorField tensor_divergence(const TensorField& t);
ScalarField laplacian(const ScalarField& f);
/// -(K f)/w with K the edge stiffness matrix: the exact discrete gradient
/// of 1/2 sum_e V_e (df/h)^2 divided by nodal weights.
ScalarField variational_laplacian(const ScalarField& f);

/// Edge-averaged squared gradient G_i with sum_i w_i G_i = sum_e V_e (df/h)^2.
std::vector<double> edge_gradient_sq(const ScalarField& f);
/// |grad f|^2 per node: exact attachment if present, else edge_gradient_sq.
std::vector<double> gradient_sq(const ScalarField& f);

double integrate(const ScalarField& f);
double integrate(const GridPtr& grid, const std::vector<double>& values);

/// Frobenius contraction T : S per node, with the radial rule
/// T : S = T_rr S_rr + 2 T_tt S_tt.
std::vector<double> contract(const TensorField& t, const TensorField& s);
/// Dot product per node.
std::vector<double> dot(const VectorField& a, const VectorField& b);

/// Multilinear interpolation at a physical point (radial: uses |x|).
double interpolate(const ScalarField& f, const Point& x);
/// Resample onto another grid by multilinear interpolation.
ScalarField resample(const ScalarField& f, const GridPtr& target);

/// FNV-1a hash of node values, used to bind PB solutions to their phase field.
std::uint64_t field_hash(const std::vector<double>& values);

}  // namespace solvate
