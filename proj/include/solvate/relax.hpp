#pragma once

// L2 gradient flow phi_t = -delta F_xi[phi] with semi-implicit stepping
// (surface Laplacian implicit, everything else explicit) and xi-continuation.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "solvate/energy.hpp"
#include "solvate/forces.hpp"

namespace solvate {

struct FlowOptions {
  double dt0 = -1.0;  // <= 0 means xi^2
  double dt_min = 1e-14;
  double dt_growth = 2.0;
  int pb_refresh = 5;  // explicit electrostatic forces use a psi at most this many steps old
  double slack = 0.5;
  int max_steps = 200;
  std::vector<char> pinned;  // optional Dirichlet mask (nodes keep their initial value)
};

struct FlowLogEntry {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  EnergyBreakdown energy;
  double grad_norm = 0.0;
  bool accepted = true;
};

struct FlowState {
  ScalarField phi;
  double xi = 0.1;
  double t = 0.0;
  double dt = 0.0;
  int step = 0;
  double bound = 0.0;  // max|phi| allowed
  EnergyBreakdown energy;
  double grad_norm = 0.0;
  std::vector<double> energy_history;  // accepted totals
  std::vector<FlowLogEntry> log;
  std::optional<PBSolution> pb;  // psi used by the explicit forces
  int pb_age = 0;
  bool partial = false;
};

/// Evaluates energy and gradient norm for a fresh state.
FlowState start_flow(const PhaseFieldSystem& sys, ScalarField phi, double xi, const FlowOptions& options);

/// One accepted step; dt is halved until F_xi does not increase.
/// Throws StagnationError when dt drops below dt_min, BoundViolation when max|phi| escapes the bound.
FlowState flow_step(const PhaseFieldSystem& sys, const FlowState& state, const FlowOptions& options);

/// Flows until the discrete L2 norm of delta F is at most `tol` or the step
/// budget runs out (partial flag set). tol = +inf returns the initial state.
FlowState minimize(const PhaseFieldSystem& sys, double xi, const ScalarField& phi0, double tol,
                   const FlowOptions& options = {});

using SystemFactory = std::function<PhaseFieldSystem(double xi)>;

/// Throws ValidationError unless the schedule is strictly decreasing within (0, xi_0].
void validate_schedule(const std::vector<double>& schedule);

/// Minimizes at each xi, warm-starting from the previous minimizer resampled onto the new grid.
std::vector<FlowState> xi_continuation(const SystemFactory& factory, const std::vector<double>& schedule,
                                       const ScalarField& phi0, double tol, const FlowOptions& options = {});

/// step,t,dt,F_total,volume,surface,vdw,ele,grad_norm
std::string flow_log_csv(const FlowState& state);

}  // namespace solvate
