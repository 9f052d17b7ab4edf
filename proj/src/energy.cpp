#include "solvate/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "solvate/errors.hpp"
#include "solvate/quadrature.hpp"

namespace solvate {

std::vector<std::string> system_violations(const GridPtr& grid, const SolvationParams& params,
                                           const std::vector<SoluteAtom>& atoms, const IonicModel& ionic) {
  auto out = params.violations();
  if (!ionic.empty()) {
    auto v = ionic.violations();
    out.insert(out.end(), v.begin(), v.end());
  }
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const auto& a = atoms[k];
    if (!(a.lj_length > 0)) out.push_back(fmt::format("[solute] atom {} needs sigma > 0", k + 1));
    if (!(a.smear_width > 0)) out.push_back(fmt::format("atom {} needs a positive smear width", k + 1));
    bool interior = true;
    if (grid->is_radial()) {
      interior = distance(a.position, {0, 0, 0}) == 0.0;
      if (!interior) out.push_back(fmt::format("[geometry] atom {} must sit at the origin of a radial grid", k + 1));
      continue;
    }
    for (int d = 0; d < grid->dim(); ++d)
      if (!(a.position[d] > grid->lo(d) && a.position[d] < grid->hi(d))) interior = false;
    for (int d = grid->dim(); d < 3; ++d)
      if (a.position[d] != 0.0) interior = false;
    if (!interior) out.push_back(fmt::format("[geometry] atom {} is not strictly inside the domain", k + 1));
  }
  return out;
}

PhaseFieldSystem PhaseFieldSystem::build(GridPtr grid, const SolvationParams& params, std::vector<SoluteAtom> atoms,
                                         IonicModel ionic, DielectricKind kind, double u_cap, FarField far_field,
                                         PBOptions pb) {
  auto violations = system_violations(grid, params, atoms, ionic);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  PhaseFieldSystem s;
  s.grid = std::move(grid);
  s.params = params;
  s.atoms = std::move(atoms);
  s.ionic = std::move(ionic);
  s.dielectric = {params.eps_p, params.eps_w, kind};
  s.u_cap = u_cap;
  s.far_field = far_field;
  s.pb = pb;

  const std::size_t n = s.grid->node_count();
  const int gdim = s.geometric_dim();
  std::vector<double> u(n), rho(n), psi(n, 0.0);
  double kappa_d = 0.0;
  for (const auto& sp : s.ionic.species()) kappa_d += sp.bulk_conc * sp.charge * sp.charge;
  kappa_d = std::sqrt(kappa_d / (params.eps_w * params.kBT));
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = s.grid->coord(i);
    u[i] = s.atoms.empty() ? 0.0 : eval_U_capped(x, s.atoms, u_cap);
    rho[i] = smeared_charge_density(x, s.atoms, gdim);
    if (far_field == FarField::screened_coulomb && s.grid->on_boundary(i)) {
      for (const auto& a : s.atoms) {
        const double r = std::max(distance(x, a.position), 1e-12);
        psi[i] += a.charge * std::exp(-kappa_d * r) / (4.0 * std::numbers::pi * params.eps_w * r);
      }
    }
  }
  s.U = ScalarField(s.grid, std::move(u));
  s.rho = ScalarField(s.grid, std::move(rho));
  s.psi_inf = ScalarField(s.grid, std::move(psi));
  return s;
}

bool PhaseFieldSystem::electrostatics_active() const {
  return rho.max_abs() > 0.0 || psi_inf.max_abs() > 0.0;
}

std::string EnergyBreakdown::csv_header() { return "xi,volume,surface,vdw,ele,total,discrepancy_L1"; }

std::string EnergyBreakdown::csv_row() const {
  const std::string x = label.empty() ? fmt::format("{:.17g}", xi) : label;
  return fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", x, volume, surface, vdw, ele, total,
                     discrepancy_L1);
}

double volume_term(const PhaseFieldSystem& sys, const ScalarField& phi) {
  require_same_grid(sys.grid, phi.grid());
  const auto& w = sys.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * phi[i] * phi[i];
  return sys.params.pressure * s;
}

double surface_term(const PhaseFieldSystem& sys, const ScalarField& phi, double xi) {
  require_same_grid(sys.grid, phi.grid());
  const auto g2 = gradient_sq(phi);
  const auto& w = sys.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * (0.5 * xi * g2[i] + eval_W(phi[i]) / xi);
  return sys.params.surface_tension * s;
}

double vdw_term(const PhaseFieldSystem& sys, const ScalarField& phi) {
  require_same_grid(sys.grid, phi.grid());
  const auto& w = sys.grid->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double m = phi[i] - 1.0;
    if (m != 0.0) s += w[i] * m * m * sys.U[i];
  }
  return sys.params.solvent_density * s;
}

PBSolution solve_pb(const PhaseFieldSystem& sys, const ScalarField& phi) {
  return solve(make_diffuse_problem(phi, sys.dielectric, sys.ionic, sys.params.kBT, sys.rho, sys.psi_inf), sys.pb);
}

PBSolution solve_pb_sharp(const PhaseFieldSystem& sys, const InterfaceShape& shape) {
  return solve_sharp(shape, sys.grid, sys.dielectric, sys.ionic, sys.params.kBT, sys.rho, sys.psi_inf, sys.pb);
}

EnergyBreakdown total_F_xi(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const PBSolution& pb) {
  if (pb.mode != PBMode::diffuse || pb.phi_hash != field_hash(phi.data()))
    throw ConsistencyError("PB solution was computed for a different phase field");
  EnergyBreakdown e;
  e.xi = xi;
  e.volume = volume_term(sys, phi);
  e.surface = surface_term(sys, phi, xi);
  e.vdw = vdw_term(sys, phi);
  e.ele = pb.f_ele();
  e.total = e.volume + e.surface + e.vdw + e.ele;
  e.discrepancy_L1 = discrepancy(phi, xi).l1;
  return e;
}

EnergyBreakdown evaluate_F_xi(const PhaseFieldSystem& sys, const ScalarField& phi, double xi) {
  if (sys.electrostatics_active()) return total_F_xi(sys, phi, xi, solve_pb(sys, phi));
  EnergyBreakdown e;
  e.xi = xi;
  e.volume = volume_term(sys, phi);
  e.surface = surface_term(sys, phi, xi);
  e.vdw = vdw_term(sys, phi);
  e.ele = 0.0;
  e.total = e.volume + e.surface + e.vdw;
  e.discrepancy_L1 = discrepancy(phi, xi).l1;
  return e;
}

double sharp_vdw_integral(const PhaseFieldSystem& sys, const InterfaceShape& shape) {
  for (const auto& a : sys.atoms)
    if (!shape.contains(a.position)) return kInfinity;
  if (sys.atoms.empty()) return 0.0;
  const auto& grid = *sys.grid;
  double s = 0.0;
  if (grid.is_radial()) {
    const double R = shape.radius(), rmax = grid.hi(0);
    auto f = [&](double r) {
      return 4.0 * std::numbers::pi * r * r * eval_U_capped({r, 0.0, 0.0}, sys.atoms, sys.u_cap);
    };
    // split so the adaptive rule sees the fast decay near R
    const double mid = std::min(rmax, R + 4.0);
    s = integrate_adaptive(f, R, mid, 1e-14);
    if (mid < rmax) s += integrate_adaptive(f, mid, rmax, 1e-14);
  } else {
    const auto& w = grid.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = shape.signed_distance(grid.coord(i));
      const double outside = d < 0 ? 1.0 : (d > 0 ? 0.0 : 0.5);
      s += w[i] * outside * sys.U[i];
    }
  }
  return sys.params.solvent_density * s;
}

EnergyBreakdown total_F_0(const PhaseFieldSystem& sys, const InterfaceShape& shape, const PBSolution& sharp) {
  if (sharp.mode != PBMode::sharp) throw ConsistencyError("total_F_0 needs a sharp-mode PB solution");
  EnergyBreakdown e;
  e.label = "sharp";
  e.volume = sys.params.pressure * shape.enclosed_volume(*sys.grid);
  e.surface = sys.params.surface_tension * shape.perimeter(*sys.grid);
  e.vdw = sharp_vdw_integral(sys, shape);
  e.ele = sharp.f_ele();
  e.total = e.volume + e.surface + e.vdw + e.ele;
  e.discrepancy_L1 = 0.0;
  return e;
}

ScalarField eta_transform(const ScalarField& phi) {
  ScalarField out(phi.grid());
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = eval_eta(phi[i]);
  return out;
}

double eta_total_variation(const ScalarField& phi) {
  const auto g2 = gradient_sq(phi);
  const auto& w = phi.grid()->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * eval_sqrt_2W(phi[i]) * std::sqrt(g2[i]);
  return s;
}

Discrepancy discrepancy(const ScalarField& phi, double xi) {
  const auto g2 = gradient_sq(phi);
  Discrepancy d;
  d.field = ScalarField(phi.grid());
  auto& v = d.field.values();
  const auto& w = phi.grid()->weights();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = 0.5 * xi * g2[i] - eval_W(phi[i]) / xi;
    d.l1 += w[i] * std::abs(v[i]);
  }
  return d;
}

double equipartition_remainder(const ScalarField& phi, double xi) {
  const auto g2 = gradient_sq(phi);
  const auto& w = phi.grid()->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::sqrt(0.5 * xi * g2[i]);
    const double b = std::sqrt(eval_W(phi[i]) / xi);
    s += w[i] * std::abs(a - b) * (a + b);
  }
  return s;
}

double coercivity_margin(const EnergyBreakdown& e, const ScalarField& phi, double c3, double c4) {
  const auto g2 = edge_gradient_sq(phi);
  const auto& w = phi.grid()->weights();
  double h1 = 0.0, l4 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p2 = phi[i] * phi[i];
    h1 += w[i] * (p2 + g2[i]);
    l4 += w[i] * p2 * p2;
  }
  return e.total - (c3 * (h1 + l4) - c4);
}

}  // namespace solvate
