#pragma once

// Nonlinear Poisson-Boltzmann solves on a StructuredGrid.
//
// Discrete energy
//   E(u) = 1/2 sum_e c_e (u_j - u_i)^2 - sum_i w_i rho_i u_i + sum_i kappa_i B(u_i)
// with c_e = eps_e V_e / h_e^2. Diffuse mode uses eps_e from nodal eps(phi)
// weighted by the edge shares and kappa_i = w_i (phi_i - 1)^2; sharp mode uses
// the cut-fraction harmonic mean across dG and kappa_i = measure of the node's
// hat function outside G.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solvate/grid.hpp"
#include "solvate/model.hpp"
#include "solvate/shape.hpp"

namespace solvate {

struct PBOptions {
  double tol = 1e-10;
  int max_iters = 60;
  int max_halvings = 30;
  double c_bound = 50.0;
  bool check_bound = true;
};

enum class PBMode { diffuse, sharp };

struct PBProblem {
  GridPtr grid;
  PBMode mode = PBMode::diffuse;
  ScalarField phi;                      // diffuse mode
  std::optional<InterfaceShape> shape;  // sharp mode
  DielectricProfile dielectric;
  IonicModel ionic;  // empty: no mobile ions
  double kBT = 1.0;
  ScalarField rho;
  ScalarField psi_inf;  // only boundary nodes are used

  // assembled coefficients
  std::vector<double> edge_coef;
  std::vector<double> kappa;
  std::vector<char> solute;  // node counts as solute for the bound check
  std::uint64_t phi_hash = 0;
};

PBProblem make_diffuse_problem(const ScalarField& phi, const DielectricProfile& dielectric, const IonicModel& ionic,
                               double kBT, const ScalarField& rho, const ScalarField& psi_inf);
PBProblem make_sharp_problem(const InterfaceShape& shape, const GridPtr& grid, const DielectricProfile& dielectric,
                             const IonicModel& ionic, double kBT, const ScalarField& rho,
                             const ScalarField& psi_inf);

struct PBSolution {
  ScalarField psi;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  double energy = 0.0;  // E at psi
  double max_psi = 0.0;
  double max_psi_off_solute = 0.0;
  std::uint64_t phi_hash = 0;
  PBMode mode = PBMode::diffuse;

  /// F_ele = -min E.
  double f_ele() const { return -energy; }
  std::string diagnostics_json() const;
};

/// E_phi[u]; u must equal psi_inf on boundary nodes (AdmissibilityError otherwise).
double electrostatic_energy(const PBProblem& problem, const ScalarField& u);

/// Damped Newton on the discrete weak form.
PBSolution solve(const PBProblem& problem, const PBOptions& options = {});

PBSolution solve_sharp(const InterfaceShape& shape, const GridPtr& grid, const DielectricProfile& dielectric,
                       const IonicModel& ionic, double kBT, const ScalarField& rho, const ScalarField& psi_inf,
                       const PBOptions& options = {});

/// Largest ratio r_{k+1}/r_k over the final three Newton iterations.
double newton_contraction(const std::vector<double>& history);

/// Discrete H1 norm sqrt(sum w e^2 + sum_e V_e (de/h)^2).
double h1_norm(const ScalarField& e);

struct ContinuityReport {
  std::vector<double> h1_delta;
  std::vector<double> energy_delta;
  bool h1_monotone = true;
};

/// Distances of each solve in `sequence` from `reference` on a common grid.
ContinuityReport continuity_probe(const PBSolution& reference, const std::vector<PBProblem>& sequence,
                                  const PBOptions& options = {});

}  // namespace solvate
