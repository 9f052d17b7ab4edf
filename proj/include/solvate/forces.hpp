#pragma once

// First variation, force densities, stress tensors, weak pairings against
// compactly supported test fields, and sharp-interface boundary forces.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "solvate/energy.hpp"
#include "solvate/grid.hpp"
#include "solvate/pb.hpp"
#include "solvate/shape.hpp"

namespace solvate {

// ---- test fields ----------------------------------------------------------

/// C^2 radial cutoff about `center`: 1 for r <= r1, 0 for r >= r2. With
/// inner radii set, also 0 for r <= inner1 and 1 for r >= inner2.
struct Cutoff {
  Point center{0, 0, 0};
  double r1 = 0.5;
  double r2 = 1.0;
  double inner1 = -1.0;
  double inner2 = -1.0;

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  /// True when the cutoff vanishes on a neighbourhood of x.
  bool vanishes_near(const Point& x) const;
};

enum class TestFieldKind { constant, radial, rotational, polynomial };

/// V = sum_k coef_k p_k(x) c_k(x) with p_k from a small analytic family.
class TestField {
 public:
  static TestField constant(const Point& direction, const Cutoff& cutoff);
  static TestField radial(const Cutoff& cutoff);
  /// Rotation about the z axis through the cutoff centre.
  static TestField rotational(const Cutoff& cutoff);
  /// Random quadratic polynomial in (x - centre), coefficients in [-1, 1].
  static TestField polynomial(std::uint64_t seed, int dim, const Cutoff& cutoff);
  static TestField zero();

  TestField scaled(double a) const;
  TestField plus(const TestField& other) const;

  Point value(const Point& x) const;
  /// (grad V)_ij = d_j V_i, row-major 3 x 3.
  std::array<double, 9> jacobian(const Point& x) const;
  bool vanishes_near(const Point& x) const;

  VectorField sample(const GridPtr& grid) const;
  /// Cartesian: full Jacobian restricted to the grid dimension. Radial: [v', v/r].
  TensorField sample_gradient(const GridPtr& grid) const;

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

 private:
  struct Term {
    double coef = 1.0;
    TestFieldKind kind = TestFieldKind::constant;
    Point direction{0, 0, 0};
    std::array<double, 3> a{};
    std::array<double, 9> b{};
    std::array<double, 27> c{};
    Cutoff cutoff;
  };
  std::vector<Term> terms_;
  std::string id_;
};

// ---- phase-field forces ---------------------------------------------------

/// Nodewise first variation of F_xi, matching the discrete energy exactly for
/// plain fields (variational Laplacian and edge-averaged |grad psi|^2).
ScalarField variation_delta_F(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const PBSolution& pb);
/// Same with psi supplied directly (no staleness check).
ScalarField variation_delta_F(const PhaseFieldSystem& sys, const ScalarField& phi, double xi,
                              const ScalarField& psi);

struct ForceSet {
  VectorField vol, sur, vdw, ele;
  VectorField total() const;
};

ForceSet force_densities(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const ScalarField& psi);

struct StressSet {
  TensorField vol, sur, vdw, ele;
  double xi = 0.0;
  std::uint64_t phi_hash = 0;
  std::uint64_t psi_hash = 0;
};

StressSet stress_set(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const ScalarField& psi);
/// The Cahn-Hilliard tensor [xi/2 |grad phi|^2 + W/xi] I - xi grad phi (x) grad phi (no gamma0).
TensorField ch_tensor(const ScalarField& phi, double xi);

struct DivergenceResidual {
  std::array<double, 4> sup{};  // vol, sur, vdw, ele
  std::array<double, 4> l2{};
};

/// Residuals of the divergence identities over nodes at least `margin` nodes from the boundary.
DivergenceResidual divergence_residual(const PhaseFieldSystem& sys, const StressSet& stress, const ForceSet& forces,
                                       const ScalarField& phi, const ScalarField& psi, int margin = 2);

enum class StressTerm { vol, sur, vdw, ele };
std::string to_string(StressTerm t);

/// -int T : grad V.
double weak_pairing(const TensorField& t, const TestField& v);
/// -int T : grad V plus the term-specific extra (vdW: -rho0 int (phi-1)^2 grad U . V;
/// ele: + int rho grad psi . V). vdW pairings require supp V to avoid the atoms.
double weak_pairing(const PhaseFieldSystem& sys, const StressSet& stress, StressTerm term, const TestField& v,
                    const ScalarField& phi, const ScalarField& psi);
/// int T : Psi for a tensor test field.
double tensor_pairing(const TensorField& t, const TensorField& psi);
double force_pairing(const VectorField& f, const TestField& v);
/// int (-xi lap phi + W'(phi)/xi) grad phi . V.
double curvature_pairing(const ScalarField& phi, double xi, const TestField& v);

// ---- sharp interface ------------------------------------------------------

struct BoundaryForceSample {
  Point x{0, 0, 0};
  Point normal{0, 0, 0};
  double weight = 0.0;
  double psi = 0.0;
  double dn_inside = 0.0;   // normal derivative trace from G
  double dn_outside = 0.0;  // normal derivative trace from the solvent
  double tangential_sq = 0.0;
  // normal components of the boundary forces
  double f_vol = 0.0, f_sur = 0.0, f_vdw = 0.0, f_ele = 0.0;
};

struct SharpForces {
  std::vector<BoundaryForceSample> samples;
  double weak_vol = 0.0;  // int f0 . V dS per term
  double weak_sur = 0.0;
  double weak_vdw = 0.0;
  double weak_ele = 0.0;
};

SharpForces sharp_boundary_force(const PhaseFieldSystem& sys, const InterfaceShape& shape, const PBSolution& sharp,
                                 const TestField& v);

/// {int [T_ele(chi) : grad V - rho grad psi . V], -int f0_ele . V dS}.
std::pair<double, double> dielectric_force_identity_check(const PhaseFieldSystem& sys, const InterfaceShape& shape,
                                                          const PBSolution& sharp, const TestField& v);

}  // namespace solvate
