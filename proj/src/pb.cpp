#include "solvate/pb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <json.hpp>

#include "solvate/errors.hpp"

namespace solvate {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// 4 pi * int over [a, b] intersected with (R, inf) of hat(r) r^2 dr,
// with the hat equal to 1 at b when `at_b`.
double outside_hat_moment(double a, double b, bool at_b, double R) {
  const double lo = std::max(a, R);
  if (lo >= b) return 0.0;
  static const double xs[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double ws[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double mid = 0.5 * (lo + b), half = 0.5 * (b - lo);
  double s = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double r = mid + half * xs[q];
    const double t = (r - a) / (b - a);
    s += ws[q] * (at_b ? t : 1.0 - t) * r * r;
  }
  return 4.0 * std::numbers::pi * half * s;
}

void check_inputs(const GridPtr& grid, const ScalarField& rho, const ScalarField& psi_inf) {
  require_same_grid(grid, rho.grid());
  require_same_grid(grid, psi_inf.grid());
  if (!rho.all_finite()) throw ValidationError({"charge density has non-finite values"});
  if (!psi_inf.all_finite()) throw ValidationError({"boundary data psi_inf has non-finite values"});
}

struct Newton {
  const PBProblem& p;
  const StructuredGrid& g;
  std::vector<long> free_index;  // -1 on Dirichlet nodes
  long nfree = 0;

  explicit Newton(const PBProblem& prob) : p(prob), g(*prob.grid) {
    free_index.assign(g.node_count(), -1);
    for (std::size_t i = 0; i < g.node_count(); ++i)
      if (!g.on_boundary(i)) free_index[i] = nfree++;
  }

  // Weak residual on all nodes (Dirichlet entries are ignored) and the scale used to normalise it.
  double residual(const std::vector<double>& u, std::vector<double>& r) const {
    const auto& w = g.weights();
    const std::size_t n = g.node_count();
    r.assign(n, 0.0);
    std::vector<double> scale(n, 0.0);
    const auto& edges = g.edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& e = edges[k];
      const double c = p.edge_coef[k];
      const double flux = c * (u[e.j] - u[e.i]);
      r[e.i] -= flux;
      r[e.j] += flux;
      const double mag = c * (std::abs(u[e.i]) + std::abs(u[e.j]));
      scale[e.i] += mag;
      scale[e.j] += mag;
    }
    double sup = 0.0, sup_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ion = p.kappa[i] != 0.0 ? p.kappa[i] * eval_B_prime(u[i], p.ionic, p.kBT) : 0.0;
      r[i] += ion - w[i] * p.rho[i];
      if (free_index[i] < 0) continue;
      const double s = (scale[i] + std::abs(ion) + w[i] * std::abs(p.rho[i])) / w[i];
      sup_scale = std::max(sup_scale, s);
      sup = std::max(sup, std::abs(r[i]) / w[i]);
    }
    if (!std::isfinite(sup)) return std::numeric_limits<double>::infinity();
    return sup / (1.0 + sup_scale);
  }

  SpMat jacobian(const std::vector<double>& u) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.edges().size() * 4 + nfree);
    const auto& edges = g.edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& e = edges[k];
      const double c = p.edge_coef[k];
      const long a = free_index[e.i], b = free_index[e.j];
      if (a >= 0) trip.emplace_back(a, a, c);
      if (b >= 0) trip.emplace_back(b, b, c);
      if (a >= 0 && b >= 0) {
        trip.emplace_back(a, b, -c);
        trip.emplace_back(b, a, -c);
      }
    }
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const long a = free_index[i];
      if (a < 0) continue;
      const double d = p.kappa[i] != 0.0 ? p.kappa[i] * eval_B_second(u[i], p.ionic, p.kBT) : 0.0;
      trip.emplace_back(a, a, d);
    }
    SpMat m(nfree, nfree);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }
};

double energy_of(const PBProblem& p, const std::vector<double>& u) {
  const auto& g = *p.grid;
  const auto& w = g.weights();
  const auto& edges = g.edges();
  double e = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double du = u[edges[k].j] - u[edges[k].i];
    e += 0.5 * p.edge_coef[k] * du * du;
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    e -= w[i] * p.rho[i] * u[i];
    if (p.kappa[i] != 0.0) e += p.kappa[i] * eval_B(u[i], p.ionic, p.kBT);
  }
  return e;
}

}  // namespace

PBProblem make_diffuse_problem(const ScalarField& phi, const DielectricProfile& dielectric, const IonicModel& ionic,
                               double kBT, const ScalarField& rho, const ScalarField& psi_inf) {
  PBProblem p;
  p.grid = phi.grid();
  check_inputs(p.grid, rho, psi_inf);
  if (!phi.all_finite()) throw ValidationError({"phase field has non-finite values"});
  double fourth = 0.0;
  for (double v : phi.data()) fourth += v * v * v * v;
  if (!std::isfinite(fourth)) throw ValidationError({"phase field fourth power is not summable"});
  p.mode = PBMode::diffuse;
  p.phi = phi;
  p.dielectric = dielectric;
  p.ionic = ionic;
  p.kBT = kBT;
  p.rho = rho;
  p.psi_inf = psi_inf;
  const auto& g = *p.grid;
  const auto& w = g.weights();
  std::vector<double> eps(g.node_count());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = eval_eps(phi[i], dielectric);
  p.edge_coef.resize(g.edges().size());
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const auto& e = g.edges()[k];
    p.edge_coef[k] = (eps[e.i] * e.share_i + eps[e.j] * e.share_j) / (e.h * e.h);
  }
  p.kappa.assign(g.node_count(), 0.0);
  p.solute.assign(g.node_count(), 0);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double m = phi[i] - 1.0;
    if (!ionic.empty()) p.kappa[i] = w[i] * m * m;
    p.solute[i] = std::abs(m) <= 1e-12 ? 1 : 0;
  }
  p.phi_hash = field_hash(phi.data());
  return p;
}

PBProblem make_sharp_problem(const InterfaceShape& shape, const GridPtr& grid, const DielectricProfile& dielectric,
                             const IonicModel& ionic, double kBT, const ScalarField& rho,
                             const ScalarField& psi_inf) {
  check_inputs(grid, rho, psi_inf);
  shape.check_domain(*grid);
  PBProblem p;
  p.grid = grid;
  p.mode = PBMode::sharp;
  p.shape = shape;
  p.dielectric = dielectric;
  p.ionic = ionic;
  p.kBT = kBT;
  p.rho = rho;
  p.psi_inf = psi_inf;
  const auto& g = *grid;
  const auto& w = g.weights();
  p.edge_coef.resize(g.edges().size());
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const auto& e = g.edges()[k];
    const double theta = shape.inside_fraction(g.coord(e.i), g.coord(e.j));
    const double eps = 1.0 / (theta / dielectric.eps_p + (1.0 - theta) / dielectric.eps_w);
    p.edge_coef[k] = eps * e.volume / (e.h * e.h);
  }
  p.kappa.assign(g.node_count(), 0.0);
  p.solute.assign(g.node_count(), 0);
  std::vector<double> chi(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double d = shape.signed_distance(g.coord(i));
    chi[i] = d > 0 ? 1.0 : (d < 0 ? 0.0 : 0.5);
    p.solute[i] = d > 0 ? 1 : 0;
  }
  if (!ionic.empty()) {
    if (g.is_radial()) {
      const double h = g.h(0), R = shape.radius();
      for (int i = 0; i < g.nodes(0); ++i) {
        const double r = i * h;
        double k = 0.0;
        if (i > 0) k += outside_hat_moment(r - h, r, true, R);
        if (i < g.cells(0)) k += outside_hat_moment(r, r + h, false, R);
        p.kappa[i] = k;
      }
    } else {
      for (std::size_t i = 0; i < g.node_count(); ++i) p.kappa[i] = w[i] * (1.0 - chi[i]);
    }
  }
  p.phi_hash = field_hash(chi);
  return p;
}

double electrostatic_energy(const PBProblem& problem, const ScalarField& u) {
  require_same_grid(problem.grid, u.grid());
  const auto& g = *problem.grid;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (!g.on_boundary(i)) continue;
    const double ref = problem.psi_inf[i];
    if (std::abs(u[i] - ref) > 1e-12 * std::max(1.0, std::abs(ref)))
      throw AdmissibilityError(fmt::format("u differs from psi_inf at boundary node {}", i));
  }
  return energy_of(problem, u.data());
}

PBSolution solve(const PBProblem& problem, const PBOptions& options) {
  const auto& g = *problem.grid;
  Newton nw(problem);
  const std::size_t n = g.node_count();

  // Harmonic extension of the boundary data.
  std::vector<double> u(n, 0.0);
  bool nonzero_boundary = false;
  for (std::size_t i = 0; i < n; ++i)
    if (g.on_boundary(i)) {
      u[i] = problem.psi_inf[i];
      nonzero_boundary = nonzero_boundary || u[i] != 0.0;
    }

  SpMat jac = nw.jacobian(u);
  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.analyzePattern(jac);

  if (nonzero_boundary && nw.nfree > 0) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nw.nfree);
    const auto& edges = g.edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& e = edges[k];
      const double c = problem.edge_coef[k];
      const long a = nw.free_index[e.i], b = nw.free_index[e.j];
      if (a >= 0) trip.emplace_back(a, a, c);
      if (b >= 0) trip.emplace_back(b, b, c);
      if (a >= 0 && b >= 0) {
        trip.emplace_back(a, b, -c);
        trip.emplace_back(b, a, -c);
      } else if (a >= 0) {
        rhs[a] += c * u[e.j];
      } else if (b >= 0) {
        rhs[b] += c * u[e.i];
      }
    }
    SpMat k(nw.nfree, nw.nfree);
    k.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat> lap(k);
    const Eigen::VectorXd x = lap.solve(rhs);
    for (std::size_t i = 0; i < n; ++i)
      if (nw.free_index[i] >= 0) u[i] = x[nw.free_index[i]];
  }

  std::vector<double> r, r_try;
  double norm = nw.residual(u, r);
  std::vector<double> history{norm};
  int iterations = 0;
  while (true) {
    if (iterations >= 1 && norm <= options.tol) break;
    if (iterations >= options.max_iters)
      throw NonConvergenceError(fmt::format("Newton did not converge in {} iterations (residual {:.3e})",
                                            options.max_iters, norm),
                                history);
    jac = nw.jacobian(u);
    ldlt.factorize(jac);
    if (ldlt.info() != Eigen::Success) throw NonConvergenceError("Newton Jacobian factorization failed", history);
    Eigen::VectorXd rhs(nw.nfree);
    for (std::size_t i = 0; i < n; ++i)
      if (nw.free_index[i] >= 0) rhs[nw.free_index[i]] = -r[i];
    const Eigen::VectorXd step = ldlt.solve(rhs);

    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial(u);
    double trial_norm = norm;
    for (int halving = 0; halving <= options.max_halvings; ++halving) {
      for (std::size_t i = 0; i < n; ++i)
        if (nw.free_index[i] >= 0) trial[i] = u[i] + alpha * step[nw.free_index[i]];
      trial_norm = nw.residual(trial, r_try);
      if (trial_norm < norm || trial_norm <= options.tol) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No damped step improves the residual: accept the iterate if it already
      // sits at the round-off floor, otherwise report failure.
      if (iterations >= 1 && norm <= 1e-8) break;
      throw NonConvergenceError(fmt::format("Newton line search failed (residual {:.3e})", norm), history);
    }
    u.swap(trial);
    r.swap(r_try);
    norm = trial_norm;
    history.push_back(norm);
    ++iterations;
  }

  PBSolution sol;
  sol.psi = ScalarField(problem.grid, u);
  sol.iterations = iterations;
  sol.residual = norm;
  sol.residual_history = std::move(history);
  sol.energy = energy_of(problem, u);
  sol.phi_hash = problem.phi_hash;
  sol.mode = problem.mode;
  for (std::size_t i = 0; i < n; ++i) {
    sol.max_psi = std::max(sol.max_psi, std::abs(u[i]));
    if (!problem.solute[i]) sol.max_psi_off_solute = std::max(sol.max_psi_off_solute, std::abs(u[i]));
  }
  if (!std::isfinite(sol.energy)) throw NonConvergenceError("electrostatic energy is not finite", sol.residual_history);
  if (options.check_bound && sol.max_psi_off_solute > options.c_bound)
    throw BoundViolation(fmt::format("|psi| = {:.6g} exceeds the a-priori cap {} off the solute",
                                     sol.max_psi_off_solute, options.c_bound));
  return sol;
}

PBSolution solve_sharp(const InterfaceShape& shape, const GridPtr& grid, const DielectricProfile& dielectric,
                       const IonicModel& ionic, double kBT, const ScalarField& rho, const ScalarField& psi_inf,
                       const PBOptions& options) {
  return solve(make_sharp_problem(shape, grid, dielectric, ionic, kBT, rho, psi_inf), options);
}

double newton_contraction(const std::vector<double>& history) {
  if (history.size() < 2) return 0.0;
  double worst = 0.0;
  const std::size_t first = history.size() >= 4 ? history.size() - 3 : 1;
  for (std::size_t k = first; k < history.size(); ++k) {
    if (history[k - 1] == 0.0) continue;
    worst = std::max(worst, history[k] / history[k - 1]);
  }
  return worst;
}

double h1_norm(const ScalarField& e) {
  const auto& g = *e.grid();
  const auto& w = g.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += w[i] * e[i] * e[i];
  for (const auto& edge : g.edges()) {
    const double d = (e[edge.j] - e[edge.i]) / edge.h;
    s += edge.volume * d * d;
  }
  return std::sqrt(s);
}

ContinuityReport continuity_probe(const PBSolution& reference, const std::vector<PBProblem>& sequence,
                                  const PBOptions& options) {
  ContinuityReport rep;
  for (const auto& prob : sequence) {
    require_same_grid(prob.grid, reference.psi.grid());
    const auto sol = solve(prob, options);
    std::vector<double> diff(sol.psi.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = sol.psi[i] - reference.psi[i];
    rep.h1_delta.push_back(h1_norm(ScalarField(prob.grid, std::move(diff))));
    rep.energy_delta.push_back(std::abs(sol.energy - reference.energy));
  }
  for (std::size_t k = 1; k < rep.h1_delta.size(); ++k)
    if (rep.h1_delta[k] > rep.h1_delta[k - 1]) rep.h1_monotone = false;
  return rep;
}

std::string PBSolution::diagnostics_json() const {
  nlohmann::json j;
  j["mode"] = mode == PBMode::sharp ? "sharp" : "diffuse";
  j["iterations"] = iterations;
  j["residual"] = residual;
  j["f_ele"] = f_ele();
  j["residual_history"] = residual_history;
  j["energy"] = energy;
  j["max_psi"] = max_psi;
  j["max_psi_off_solute"] = max_psi_off_solute;
  return j.dump(2);
}

}  // namespace solvate
