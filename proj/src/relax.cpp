#include "solvate/relax.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "solvate/errors.hpp"
#include "solvate/profiles.hpp"

namespace solvate {

namespace {

ScalarField psi_for_forces(const PhaseFieldSystem& sys, const FlowState& s) {
  if (s.pb) return s.pb->psi;
  return ScalarField(sys.grid, 0.0);
}

bool pinned_at(const FlowOptions& o, std::size_t i) { return !o.pinned.empty() && o.pinned[i] != 0; }

double grad_norm(const PhaseFieldSystem& sys, const ScalarField& dF, const FlowOptions& o) {
  const auto& w = sys.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!pinned_at(o, i)) s += w[i] * dF[i] * dF[i];
  return std::sqrt(s);
}

// Energy of phi, with the PB solution it used (if any).
std::pair<EnergyBreakdown, std::optional<PBSolution>> energy_of(const PhaseFieldSystem& sys, const ScalarField& phi,
                                                                double xi) {
  if (!sys.electrostatics_active()) return {evaluate_F_xi(sys, phi, xi), std::nullopt};
  auto pb = solve_pb(sys, phi);
  auto e = total_F_xi(sys, phi, xi, pb);
  return {e, std::move(pb)};
}

}  // namespace

FlowState start_flow(const PhaseFieldSystem& sys, ScalarField phi, double xi, const FlowOptions& options) {
  require_same_grid(sys.grid, phi.grid());
  if (!options.pinned.empty() && options.pinned.size() != phi.size())
    throw ShapeError("pinned mask does not match the grid");
  FlowState s;
  s.phi = ScalarField(phi.grid(), phi.data());  // plain copy: the flow never keeps analytic attachments
  s.xi = xi;
  s.dt = options.dt0 > 0 ? options.dt0 : xi * xi;
  s.bound = std::max(s.phi.max_abs(), 1.0) + options.slack;
  auto [e, pb] = energy_of(sys, s.phi, xi);
  s.energy = e;
  s.pb = std::move(pb);
  s.energy_history.push_back(e.total);
  s.grad_norm = grad_norm(sys, variation_delta_F(sys, s.phi, xi, psi_for_forces(sys, s)), options);
  s.log.push_back({0, 0.0, s.dt, e, s.grad_norm, true});
  return s;
}

FlowState flow_step(const PhaseFieldSystem& sys, const FlowState& state, const FlowOptions& options) {
  const auto& grid = *sys.grid;
  const std::size_t n = grid.node_count();
  const auto& w = grid.weights();
  const double xi = state.xi;
  const double g = sys.params.surface_tension * xi;

  // explicit part r = delta F - gamma0 xi K phi / w
  const auto dF = variation_delta_F(sys, state.phi, xi, psi_for_forces(sys, state));
  const auto lap = variational_laplacian(state.phi);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = dF[i] + g * lap[i];

  std::vector<Eigen::Triplet<double>> stiff;
  std::vector<double> pinned_rhs(n, 0.0);
  for (const auto& e : grid.edges()) {
    const double c = g * e.volume / (e.h * e.h);
    const bool pi = pinned_at(options, e.i), pj = pinned_at(options, e.j);
    if (!pi) stiff.emplace_back(e.i, e.i, c);
    if (!pj) stiff.emplace_back(e.j, e.j, c);
    if (!pi && !pj) {
      stiff.emplace_back(e.i, e.j, -c);
      stiff.emplace_back(e.j, e.i, -c);
    } else if (pj && !pi) {
      pinned_rhs[e.i] += c * state.phi[e.j];
    } else if (pi && !pj) {
      pinned_rhs[e.j] += c * state.phi[e.i];
    }
  }

  FlowState next = state;
  double dt = state.dt;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analysed = false;
  for (;;) {
    if (dt < options.dt_min)
      throw StagnationError(fmt::format("flow stagnated at step {} (dt = {:.3e} < dt_min, F = {:.12g}, |dF| = {:.3e})",
                                        state.step, dt, state.energy.total, state.grad_norm));
    auto trip = stiff;
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned_at(options, i)) {
        trip.emplace_back(i, i, 1.0);
        rhs[i] = state.phi[i];
      } else {
        trip.emplace_back(i, i, w[i] / dt);
        rhs[i] = w[i] * state.phi[i] / dt - w[i] * r[i] + pinned_rhs[i];
      }
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    if (!analysed) {
      solver.analyzePattern(A);
      analysed = true;
    }
    solver.factorize(A);
    if (solver.info() != Eigen::Success) throw Error("flow step matrix factorization failed");
    const Eigen::VectorXd x = solver.solve(rhs);

    ScalarField trial(sys.grid, std::vector<double>(x.data(), x.data() + n));
    const double mx = trial.max_abs();
    if (!trial.all_finite() || mx > state.bound) {
      if (!trial.all_finite() || dt <= options.dt_min * 2) {
        throw BoundViolation(fmt::format("flow left the bound max|phi| <= {:.3g} (got {:.6g}) at step {}",
                                         state.bound, mx, state.step + 1));
      }
      next.log.push_back({state.step + 1, state.t + dt, dt, state.energy, state.grad_norm, false});
      dt *= 0.5;
      continue;
    }

    std::optional<std::pair<EnergyBreakdown, std::optional<PBSolution>>> eval;
    try {
      eval = energy_of(sys, trial, xi);
    } catch (const NonConvergenceError&) {
      eval.reset();
    } catch (const BoundViolation&) {
      eval.reset();
    }
    if (!eval || !(eval->first.total <= state.energy.total)) {
      next.log.push_back({state.step + 1, state.t + dt, dt, eval ? eval->first : state.energy, state.grad_norm, false});
      dt *= 0.5;
      continue;
    }

    next.phi = std::move(trial);
    next.t = state.t + dt;
    next.step = state.step + 1;
    next.dt = dt * options.dt_growth;
    next.energy = eval->first;
    next.energy_history.push_back(eval->first.total);
    ++next.pb_age;
    if (eval->second && (next.pb_age >= std::max(options.pb_refresh, 1) || !next.pb)) {
      next.pb = std::move(eval->second);
      next.pb_age = 0;
    }
    next.grad_norm = grad_norm(sys, variation_delta_F(sys, next.phi, xi, psi_for_forces(sys, next)), options);
    next.log.push_back({next.step, next.t, dt, next.energy, next.grad_norm, true});
    return next;
  }
}

FlowState minimize(const PhaseFieldSystem& sys, double xi, const ScalarField& phi0, double tol,
                   const FlowOptions& options) {
  if (!(tol > 0)) throw DomainError("minimize needs tol > 0");
  if (std::isinf(tol)) {
    FlowState s;
    s.phi = phi0;
    s.xi = xi;
    s.dt = options.dt0 > 0 ? options.dt0 : xi * xi;
    return s;
  }
  FlowState s = start_flow(sys, phi0, xi, options);
  while (s.grad_norm > tol && s.step < options.max_steps) {
    try {
      s = flow_step(sys, s, options);
    } catch (const StagnationError&) {
      break;
    }
  }
  s.partial = s.grad_norm > tol;
  return s;
}

void validate_schedule(const std::vector<double>& schedule) {
  std::vector<std::string> v;
  if (schedule.empty()) v.push_back("xi schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0 && schedule[k] <= kXiMax))
      v.push_back(fmt::format("xi[{}] = {} outside (0, {}]", k + 1, schedule[k], kXiMax));
    if (k > 0 && !(schedule[k] < schedule[k - 1]))
      v.push_back(fmt::format("xi schedule is not strictly decreasing at entry {}", k + 1));
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::vector<FlowState> xi_continuation(const SystemFactory& factory, const std::vector<double>& schedule,
                                       const ScalarField& phi0, double tol, const FlowOptions& options) {
  validate_schedule(schedule);
  std::vector<FlowState> out;
  for (double xi : schedule) {
    const PhaseFieldSystem sys = factory(xi);
    const ScalarField& prev = out.empty() ? phi0 : out.back().phi;
    ScalarField start = prev.grid()->same_as(*sys.grid) ? ScalarField(sys.grid, prev.data()) : resample(prev, sys.grid);
    FlowOptions o = options;
    if (o.pinned.size() != start.size()) o.pinned.clear();
    out.push_back(minimize(sys, xi, start, tol, o));
  }
  return out;
}

std::string flow_log_csv(const FlowState& state) {
  std::string s = "step,t,dt,F_total,volume,surface,vdw,ele,grad_norm\n";
  for (const auto& e : state.log) {
    if (!e.accepted) continue;
    s += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", e.step, e.t, e.dt,
                     e.energy.total, e.energy.volume, e.energy.surface, e.energy.vdw, e.energy.ele, e.grad_norm);
  }
  return s;
}

}  // namespace solvate
