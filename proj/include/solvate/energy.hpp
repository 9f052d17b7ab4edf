#pragma once

// Free-energy assembly for the diffuse functional F_xi[phi] and the sharp
// functional F_0[chi_G].

#include <string>
#include <vector>

#include "solvate/grid.hpp"
#include "solvate/model.hpp"
#include "solvate/pb.hpp"
#include "solvate/shape.hpp"

namespace solvate {

enum class FarField { zero, screened_coulomb };

/// Everything a phase-field evaluation needs on one grid.
struct PhaseFieldSystem {
  GridPtr grid;
  SolvationParams params;
  std::vector<SoluteAtom> atoms;
  IonicModel ionic;
  DielectricProfile dielectric;
  double u_cap = 1e3;
  FarField far_field = FarField::zero;
  PBOptions pb;

  ScalarField U;        // min(U, u_cap) at nodes
  ScalarField rho;      // smeared solute charge
  ScalarField psi_inf;  // boundary data

  static PhaseFieldSystem build(GridPtr grid, const SolvationParams& params, std::vector<SoluteAtom> atoms,
                                IonicModel ionic, DielectricKind kind = DielectricKind::quintic, double u_cap = 1e3,
                                FarField far_field = FarField::zero, PBOptions pb = {});

  /// False when psi vanishes identically (no charges, zero boundary data).
  bool electrostatics_active() const;
  /// Dimension used for geometric formulas (3 for radial grids).
  int geometric_dim() const { return grid->is_radial() ? 3 : grid->dim(); }
};

/// Validation of a system description; returns every violated assumption.
std::vector<std::string> system_violations(const GridPtr& grid, const SolvationParams& params,
                                           const std::vector<SoluteAtom>& atoms, const IonicModel& ionic);

struct EnergyBreakdown {
  std::string label;  // xi value, or "sharp"
  double xi = 0.0;
  double volume = 0.0;
  double surface = 0.0;
  double vdw = 0.0;
  double ele = 0.0;
  double total = 0.0;
  double discrepancy_L1 = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

double volume_term(const PhaseFieldSystem& sys, const ScalarField& phi);
double surface_term(const PhaseFieldSystem& sys, const ScalarField& phi, double xi);
double vdw_term(const PhaseFieldSystem& sys, const ScalarField& phi);

PBSolution solve_pb(const PhaseFieldSystem& sys, const ScalarField& phi);
PBSolution solve_pb_sharp(const PhaseFieldSystem& sys, const InterfaceShape& shape);

/// Full breakdown; throws ConsistencyError if `pb` was solved for another phi.
EnergyBreakdown total_F_xi(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const PBSolution& pb);
/// Convenience: solves PB when electrostatics are active.
EnergyBreakdown evaluate_F_xi(const PhaseFieldSystem& sys, const ScalarField& phi, double xi);

/// rho0 * int over Omega \ G of min(U, u_cap); +infinity if an atom lies outside G.
double sharp_vdw_integral(const PhaseFieldSystem& sys, const InterfaceShape& shape);
EnergyBreakdown total_F_0(const PhaseFieldSystem& sys, const InterfaceShape& shape, const PBSolution& sharp);

/// eta = int_0^phi sqrt(2 W(t)) dt = 3 phi^2 - 2 phi^3.
ScalarField eta_transform(const ScalarField& phi);
/// int |grad eta| = int |eta'(phi)| |grad phi|.
double eta_total_variation(const ScalarField& phi);

struct Discrepancy {
  ScalarField field;  // xi/2 |grad phi|^2 - W(phi)/xi
  double l1 = 0.0;
};
Discrepancy discrepancy(const ScalarField& phi, double xi);

/// int |sqrt(xi/2)|grad phi| - sqrt(W/xi)| (sqrt(xi/2)|grad phi| + sqrt(W/xi)),
/// the bound on |surface/gamma0 - int |grad eta||.
double equipartition_remainder(const ScalarField& phi, double xi);

/// total - [c3 (|phi|_H1^2 + |phi|_4^4) - c4]; non-negative when the coercivity bound holds.
double coercivity_margin(const EnergyBreakdown& e, const ScalarField& phi, double c3, double c4);

}  // namespace solvate
