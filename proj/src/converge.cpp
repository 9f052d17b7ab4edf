#include "solvate/converge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "solvate/errors.hpp"

namespace solvate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs f(0..n-1) on up to `threads` workers; results are written by index so
// the outcome does not depend on scheduling.
template <class F>
void parallel_for(int n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += fmt::format("{}{}", k ? " " : "", v[k]);
  return s;
}

Check make_check(std::string name, double value, double threshold, bool pass, std::string detail = {}) {
  return {std::move(name), value, threshold, pass, std::move(detail)};
}

Check at_most(std::string name, double value, double threshold, std::string detail = {}) {
  return make_check(std::move(name), value, threshold, value <= threshold, std::move(detail));
}

Check at_least(std::string name, double value, double threshold, std::string detail = {}) {
  return make_check(std::move(name), value, threshold, value >= threshold, std::move(detail));
}

int geometric_dim(const StructuredGrid& g) { return g.is_radial() ? 3 : g.dim(); }

void base_provenance(ConvergenceReport& r, const StudySetup& s) {
  const GridPtr g0 = s.grid.build(s.schedule.front());
  r.provenance["grid"] = s.grid.radial ? fmt::format("radial rmax={} h=xi/{}", s.grid.rmax, s.grid.h_per_xi)
                                       : fmt::format("cartesian {}D h=xi/{} fixed=[{},{},{}]", s.grid.dim,
                                                     s.grid.h_per_xi, s.grid.fixed_cells[0], s.grid.fixed_cells[1],
                                                     s.grid.fixed_cells[2]);
  r.provenance["grid_first"] = g0->describe();
  r.provenance["shape"] = s.shape.describe();
  r.provenance["schedule"] = join(s.schedule);
  r.provenance["sequence"] = to_string(s.sequence);
  r.provenance["profile"] = to_string(s.profile);
  r.provenance["well_scale"] = fmt::format("{}", s.well_scale);
  r.provenance["pb"] = fmt::format("tol={} max_iters={} c_bound={}", s.pb.tol, s.pb.max_iters, s.pb.c_bound);
  r.provenance["flow"] = fmt::format("L2 gradient flow, semi-implicit (surface Laplacian implicit), dt0={} tol={}",
                                     s.flow.dt0 > 0 ? fmt::format("{}", s.flow.dt0) : std::string("xi^2"),
                                     s.flow_tol);
  r.provenance["seed"] = fmt::format("{}", s.seed);
  r.provenance["convergence_notion"] = "L1 distance to the indicator on each sweep grid";
  r.provenance["hypothesis_class"] =
      s.sequence == SequenceKind::lift ? "lifted profiles (recovery side)" : "relaxed minimizers";
}

struct Member {
  double xi = 0.0;
  GridPtr grid;
  PhaseFieldSystem sys;
  ScalarField phi;
};

std::vector<Member> build_sequence(const StudySetup& s) {
  validate_schedule(s.schedule);
  std::vector<Member> out(s.schedule.size());
  if (s.sequence == SequenceKind::lift) {
    parallel_for(static_cast<int>(out.size()), s.threads, [&](int k) {
      Member m;
      m.xi = s.schedule[k];
      m.grid = s.grid.build(m.xi);
      m.sys = s.system(m.grid);
      m.phi = s.lift(m.xi, m.grid);
      out[k] = std::move(m);
    });
    return out;
  }
  const GridPtr g0 = s.grid.build(s.schedule.front());
  const ScalarField phi0 = s.lift(s.schedule.front(), g0);
  auto states =
      xi_continuation([&](double xi) { return s.system(s.grid.build(xi)); }, s.schedule, phi0, s.flow_tol, s.flow);
  for (std::size_t k = 0; k < states.size(); ++k) {
    out[k].xi = s.schedule[k];
    out[k].grid = states[k].phi.grid();
    out[k].sys = s.system(out[k].grid);
    out[k].phi = states[k].phi;
  }
  return out;
}

struct SharpReference {
  PhaseFieldSystem sys;
  std::optional<PBSolution> solution;
  EnergyBreakdown row;
};

SharpReference sharp_reference(const StudySetup& s) {
  const double xi_min = *std::min_element(s.schedule.begin(), s.schedule.end());
  const double h = xi_min / s.grid.h_per_xi / s.sharp_refine;
  SharpReference ref;
  ref.sys = s.system(s.grid.build_h(h));
  s.shape.check_domain(*ref.sys.grid);
  if (ref.sys.electrostatics_active()) {
    ref.solution = solve_pb_sharp(ref.sys, s.shape);
    ref.row = total_F_0(ref.sys, s.shape, *ref.solution);
  } else {
    auto& e = ref.row;
    e.label = "sharp";
    e.volume = s.params.pressure * s.shape.enclosed_volume(*ref.sys.grid);
    e.surface = s.params.surface_tension * s.shape.perimeter(*ref.sys.grid);
    e.vdw = sharp_vdw_integral(ref.sys, s.shape);
    e.total = e.volume + e.surface + e.vdw;
  }
  return ref;
}

Series make_series(std::string name, const std::vector<double>& xi, std::vector<double> values, double target,
                   double floor) {
  Series sr;
  sr.name = std::move(name);
  sr.xi = xi;
  sr.values = std::move(values);
  sr.targets.assign(sr.values.size(), target);
  sr.finish(floor);
  return sr;
}

// Integral of |V| + |grad V| over dG: the natural scale of a force pairing.
double pairing_scale(const InterfaceShape& shape, const StructuredGrid& grid, const TestField& v) {
  const int gd = geometric_dim(grid);
  return surface_integral(
      shape, grid,
      [&](const Point& x, const Point&) {
        const auto val = v.value(x);
        const auto J = v.jacobian(x);
        double a = 0.0, b = 0.0;
        for (int i = 0; i < gd; ++i) {
          a += val[i] * val[i];
          for (int j = 0; j < gd; ++j) b += J[i * 3 + j] * J[i * 3 + j];
        }
        return std::sqrt(a) + std::sqrt(b);
      },
      1e-8);
}

double tangential_divergence_target(const InterfaceShape& shape, const StructuredGrid& grid, const TestField& v) {
  const int gd = geometric_dim(grid);
  return surface_integral(
      shape, grid,
      [&](const Point& x, const Point& nu) {
        const auto J = v.jacobian(x);
        double s = 0.0;
        for (int a = 0; a < gd; ++a) {
          s += J[a * 3 + a];
          for (int b = 0; b < gd; ++b) s -= nu[a] * J[a * 3 + b] * nu[b];
        }
        return s;
      },
      1e-10);
}

double normal_flux_target(const InterfaceShape& shape, const StructuredGrid& grid, const TestField& v,
                          const std::function<double(const Point&)>& weight) {
  return surface_integral(
      shape, grid,
      [&](const Point& x, const Point& nu) {
        const auto val = v.value(x);
        return weight(x) * (val[0] * nu[0] + val[1] * nu[1] + val[2] * nu[2]);
      },
      1e-10);
}

TensorField scalar_identity_tensor(const GridPtr& grid, const Cutoff& c) {
  TensorField t(grid);
  for (std::size_t i = 0; i < grid->node_count(); ++i) {
    const double v = c.value(grid->coord(i));
    if (grid->is_radial()) {
      t.at(i, 0) = v;
      t.at(i, 1) = v;
    } else {
      const int n = grid->dim();
      for (int a = 0; a < n; ++a) t.at(i, a * n + a) = v;
    }
  }
  return t;
}

Cutoff centred_cutoff(const StudySetup& s) {
  Cutoff c = s.cutoff;
  if (s.shape.kind() == ShapeKind::ball) c.center = s.shape.center();
  return c;
}

}  // namespace

// ---- setup ---------------------------------------------------------------

std::vector<double> default_schedule() { return {0.2, 0.14, 0.1, 0.07, 0.05}; }

GridPtr GridRecipe::build(double xi) const { return build_h(xi / h_per_xi); }

GridPtr GridRecipe::build_h(double h) const {
  if (!(h > 0)) throw DomainError("grid spacing must be positive");
  if (radial) return StructuredGrid::radial(rmax, std::max(8, static_cast<int>(std::lround(rmax / h))));
  std::array<int, 3> cells{0, 0, 0};
  for (int d = 0; d < dim; ++d)
    cells[d] = fixed_cells[d] > 0 ? fixed_cells[d] : std::max(8, static_cast<int>(std::lround((hi[d] - lo[d]) / h)));
  return StructuredGrid::cartesian(dim, lo, hi, cells);
}

std::string to_string(SequenceKind k) { return k == SequenceKind::lift ? "lift" : "relaxed"; }

SequenceKind sequence_kind_from_string(const std::string& s) {
  if (s == "lift") return SequenceKind::lift;
  if (s == "relaxed") return SequenceKind::relaxed;
  throw DomainError(fmt::format("unknown sequence kind '{}'", s));
}

void StudyTolerances::scale(double s) {
  if (!(s > 0)) throw DomainError("tolerance scale must be positive");
  for (double* p : {&volume, &surface, &vdw, &ele, &fit, &force, &equipartition_ratio, &l1_fraction, &identity,
                    &variation})
    *p *= s;
}

PhaseFieldSystem StudySetup::system(const GridPtr& grid) const {
  return PhaseFieldSystem::build(grid, params, atoms, ionic, dielectric, u_cap, far_field, pb);
}

ScalarField StudySetup::lift(double xi, const GridPtr& grid) const {
  switch (profile) {
    case ProfileKind::canonical:
      return lift_profile(Profile::canonical(xi), shape, grid);
    case ProfileKind::gk:
      return lift_profile(Profile::gk(xi, well_scale), shape, grid);
    case ProfileKind::recovery:
    default:
      return recovery_phase_field(shape, xi, grid);
  }
}

// ---- fits and series -----------------------------------------------------

FitResult richardson_fit(const std::vector<double>& xi, const std::vector<double>& values) {
  FitResult f;
  f.exponent = kNaN;
  if (values.empty()) return f;
  f.limit = values.back();
  if (values.size() < 3) return f;
  const std::size_t n = values.size();
  const double x1 = xi[n - 3], x2 = xi[n - 2], x3 = xi[n - 1];
  const double v1 = values[n - 3], v2 = values[n - 2], v3 = values[n - 1];
  if (v1 == v2 && v2 == v3) {
    f.converged = true;
    f.c = 0.0;
    return f;
  }
  if (v2 == v3 || !std::isfinite(v1 + v2 + v3)) return f;
  const double q = (v1 - v2) / (v2 - v3);
  auto ratio = [&](double p) { return (std::pow(x1, p) - std::pow(x2, p)) / (std::pow(x2, p) - std::pow(x3, p)); };
  double lo = 0.05, hi = 8.0;
  const double rlo = ratio(lo), rhi = ratio(hi);
  if (!(q > std::min(rlo, rhi) && q < std::max(rlo, rhi))) return f;
  const bool increasing = rhi > rlo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((ratio(mid) < q) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  const double p = 0.5 * (lo + hi);
  f.exponent = p;
  f.c = (v2 - v3) / (std::pow(x2, p) - std::pow(x3, p));
  f.limit = v3 - f.c * std::pow(x3, p);
  f.converged = true;
  return f;
}

double rel_error(double value, double target, double floor) {
  if (value == target) return 0.0;
  return std::abs(value - target) / std::max(std::abs(target), floor);
}

void Series::finish(double floor) {
  if (values.empty()) return;
  final_rel_error = rel_error(values.back(), targets.back(), floor);
  fit = richardson_fit(xi, values);
  fit_rel_error = rel_error(fit.limit, targets.back(), floor);
  monotone = true;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double a = std::abs(values[k - 1] - targets[k - 1]);
    const double b = std::abs(values[k] - targets[k]);
    if (b > a * (1 + 1e-12) + 1e-15) monotone = false;
  }
}

bool ConvergenceReport::passed() const {
  return status == "ok" && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Series* ConvergenceReport::find(const std::string& name) const {
  for (const auto& s : series)
    if (s.name == name) return &s;
  return nullptr;
}

const Check* ConvergenceReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<TestField> force_test_fields(const StudySetup& setup) {
  const Cutoff c = centred_cutoff(setup);
  std::vector<TestField> out;
  out.push_back(TestField::radial(c));
  if (setup.grid.radial) return out;
  out.push_back(TestField::rotational(c));
  for (int k = 0; k < setup.polynomial_fields; ++k)
    out.push_back(TestField::polynomial(setup.seed + static_cast<std::uint64_t>(k), setup.grid.dim, c));
  return out;
}

// ---- studies ---------------------------------------------------------------

ConvergenceReport energy_component_study(const StudySetup& s) {
  ConvergenceReport r;
  r.study = "energy";
  r.shape = s.shape.describe();
  r.schedule = s.schedule;
  base_provenance(r, s);

  auto members = build_sequence(s);
  for (const auto& m : members) s.shape.check_domain(*m.grid);
  r.rows.resize(members.size());
  std::vector<std::optional<PBSolution>> sols(members.size());
  parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
    auto& m = members[k];
    if (m.sys.electrostatics_active()) {
      sols[k] = solve_pb(m.sys, m.phi);
      r.rows[k] = total_F_xi(m.sys, m.phi, m.xi, *sols[k]);
    } else {
      r.rows[k] = evaluate_F_xi(m.sys, m.phi, m.xi);
    }
  });

  const SharpReference ref = sharp_reference(s);
  r.target_row = ref.row;
  const auto& t = ref.row;

  auto column = [&](double EnergyBreakdown::*field) {
    std::vector<double> v;
    for (const auto& row : r.rows) v.push_back(row.*field);
    return v;
  };
  const double fl = s.tol.floor;
  r.series.push_back(make_series("volume", s.schedule, column(&EnergyBreakdown::volume), t.volume, fl));
  r.series.push_back(make_series("surface", s.schedule, column(&EnergyBreakdown::surface), t.surface, fl));
  r.series.push_back(make_series("vdw", s.schedule, column(&EnergyBreakdown::vdw), t.vdw, fl));
  r.series.push_back(make_series("ele", s.schedule, column(&EnergyBreakdown::ele), t.ele, fl));

  const std::array<std::pair<const char*, double>, 4> tols{
      {{"volume", s.tol.volume}, {"surface", s.tol.surface}, {"vdw", s.tol.vdw}, {"ele", s.tol.ele}}};
  for (const auto& [name, tol] : tols) {
    const Series* sr = r.find(name);
    r.checks.push_back(at_most(fmt::format("{}_final_rel_error", name), sr->final_rel_error, tol));
  }

  // |total - target| <= sum of component errors, on the final row
  const auto& last = r.rows.back();
  const double total_err = std::abs(last.total - t.total);
  const double comp_err = std::abs(last.volume - t.volume) + std::abs(last.surface - t.surface) +
                          std::abs(last.vdw - t.vdw) + std::abs(last.ele - t.ele);
  r.checks.push_back(at_most("triangle_inequality", total_err - comp_err, 1e-12 * (1 + std::abs(t.total))));

  // each component error is bounded by the total error plus the liminf slacks
  double slack = 0.0;
  const std::array<std::pair<double, double>, 4> vt{{{last.volume, t.volume},
                                                      {last.surface, t.surface},
                                                      {last.vdw, t.vdw},
                                                      {last.ele, t.ele}}};
  for (const auto& [v, tg] : vt) slack += std::max(0.0, tg - v);
  double worst = 0.0;
  for (const auto& [v, tg] : vt) worst = std::max(worst, std::abs(v - tg) - (total_err + slack));
  r.checks.push_back(at_most("component_equivalence", worst, 1e-12 * (1 + std::abs(t.total))));

  r.fields.emplace_back("phi", members.back().phi);
  if (sols.back()) r.fields.emplace_back("psi", sols.back()->psi);
  if (ref.solution) r.fields.emplace_back("psi_sharp", ref.solution->psi);
  return r;
}

ConvergenceReport equipartition_study(const StudySetup& s) {
  ConvergenceReport r;
  r.study = "equipartition";
  r.shape = s.shape.describe();
  r.schedule = s.schedule;
  base_provenance(r, s);

  auto members = build_sequence(s);
  r.fields.emplace_back("phi", members.back().phi);
  std::vector<double> disc(members.size()), surf(members.size());
  parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
    disc[k] = discrepancy(members[k].phi, members[k].xi).l1;
    surf[k] = surface_term(members[k].sys, members[k].phi, members[k].xi) / s.params.surface_tension;
  });
  const double P = s.shape.perimeter(*members.front().grid);
  r.series.push_back(make_series("discrepancy_L1", s.schedule, disc, 0.0, P));
  r.series.push_back(make_series("surface_over_gamma0", s.schedule, surf, P, s.tol.floor));

  const bool plateau_expected = s.profile == ProfileKind::gk && s.well_scale != 1.0;
  if (plateau_expected) {
    const double mn = *std::min_element(disc.begin(), disc.end());
    r.checks.push_back(at_least("discrepancy_plateau", mn / P, s.tol.plateau, "min discrepancy / P"));
  } else {
    // an exactly equi-partitioned profile leaves only roundoff, which need not decrease
    const double zero = 1e-9 * P;
    bool decreasing = true;
    for (std::size_t k = 1; k < disc.size(); ++k)
      if (!(disc[k] < disc[k - 1] || disc[k] <= zero)) decreasing = false;
    r.checks.push_back(make_check("discrepancy_monotone", decreasing ? 1.0 : 0.0, 1.0, decreasing));
    const double ratio = disc.back() <= zero ? 0.0 : disc.back() / disc.front();
    r.checks.push_back(at_most("discrepancy_final_ratio", ratio, s.tol.equipartition_ratio, "last / first"));
  }
  return r;
}

ConvergenceReport ch_force_study(const StudySetup& s) {
  ConvergenceReport r;
  r.study = "ch-force";
  r.shape = s.shape.describe();
  r.schedule = s.schedule;
  base_provenance(r, s);
  r.provenance["curvature_form"] = "discrete-H2 surrogate";

  auto members = build_sequence(s);
  r.fields.emplace_back("phi", members.back().phi);
  std::vector<double> surf(members.size());
  parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
    surf[k] = surface_term(members[k].sys, members[k].phi, members[k].xi) / s.params.surface_tension;
  });
  const auto& g0 = *members.back().grid;
  const double P = s.shape.perimeter(g0);
  r.series.push_back(make_series("surface_over_gamma0", s.schedule, surf, P, s.tol.floor));
  const double gate = r.series.back().final_rel_error;
  r.checks.push_back(at_most("hypothesis_energy_convergence", gate, s.tol.surface));
  if (gate > s.tol.surface) {
    r.status = "hypothesis unmet";
    return r;
  }

  const int n = geometric_dim(g0);
  const Cutoff cut = centred_cutoff(s);
  const auto fields = force_test_fields(s);

  // Psi = c I
  {
    const double target = (n - 1) * surface_integral(
                                         s.shape, g0, [&](const Point& x, const Point&) { return cut.value(x); }, 1e-10);
    std::vector<double> vals(members.size());
    parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
      vals[k] = tensor_pairing(ch_tensor(members[k].phi, members[k].xi), scalar_identity_tensor(members[k].grid, cut));
    });
    r.series.push_back(make_series("Psi=cI", s.schedule, vals, target, s.tol.floor));
  }
  for (const auto& v : fields) {
    const double floor = std::max(s.tol.floor, 0.05 * pairing_scale(s.shape, g0, v));
    const double t_div = tangential_divergence_target(s.shape, g0, v);
    const double H = s.shape.mean_curvature();
    const double t_curv = -(n - 1) * normal_flux_target(s.shape, g0, v, [&](const Point&) { return H; });
    std::vector<double> weak(members.size()), curv(members.size());
    parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
      const auto T = ch_tensor(members[k].phi, members[k].xi);
      weak[k] = tensor_pairing(T, v.sample_gradient(members[k].grid));
      curv[k] = curvature_pairing(members[k].phi, members[k].xi, v);
    });
    r.series.push_back(make_series(fmt::format("T:gradV[{}]", v.id()), s.schedule, weak, t_div, floor));
    r.series.push_back(make_series(fmt::format("curvature[{}]", v.id()), s.schedule, curv, t_curv, floor));
  }
  for (std::size_t k = 1; k < r.series.size(); ++k)
    r.checks.push_back(at_most(r.series[k].name + "_final_rel_error", r.series[k].final_rel_error, s.tol.force));
  return r;
}

ConvergenceReport solvation_force_study(const StudySetup& s) {
  ConvergenceReport r;
  r.study = "solvation-force";
  r.shape = s.shape.describe();
  r.schedule = s.schedule;
  base_provenance(r, s);

  const ConvergenceReport energy = energy_component_study(s);
  r.rows = energy.rows;
  r.target_row = energy.target_row;
  const bool gate = energy.passed();
  r.checks.push_back(make_check("hypothesis_energy_convergence", gate ? 1.0 : 0.0, 1.0, gate));
  if (!gate) {
    r.status = "hypothesis unmet";
    return r;
  }

  auto members = build_sequence(s);
  r.fields.emplace_back("phi", members.back().phi);
  const SharpReference ref = sharp_reference(s);
  const auto& gref = *ref.sys.grid;
  const auto fields = force_test_fields(s);
  const auto& p = s.params;

  std::vector<ScalarField> psis(members.size());
  parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
    psis[k] = members[k].sys.electrostatics_active() ? solve_pb(members[k].sys, members[k].phi).psi
                                                     : ScalarField(members[k].grid, 0.0);
  });

  for (const auto& v : fields) {
    const double floor = std::max(s.tol.floor, 0.05 * pairing_scale(s.shape, gref, v));
    std::array<double, 4> target{};
    target[0] = -p.pressure * normal_flux_target(s.shape, gref, v, [](const Point&) { return 1.0; });
    target[1] = -p.surface_tension * tangential_divergence_target(s.shape, gref, v);
    target[2] = s.atoms.empty() ? 0.0
                                : p.solvent_density * normal_flux_target(s.shape, gref, v, [&](const Point& x) {
                                    return eval_U_capped(x, s.atoms, s.u_cap);
                                  });
    target[3] = ref.solution ? sharp_boundary_force(ref.sys, s.shape, *ref.solution, v).weak_ele : 0.0;

    std::vector<std::array<double, 4>> vals(members.size());
    parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
      const auto& m = members[k];
      const auto st = stress_set(m.sys, m.phi, m.xi, psis[k]);
      for (int t = 0; t < 4; ++t)
        vals[k][t] = weak_pairing(m.sys, st, static_cast<StressTerm>(t), v, m.phi, psis[k]);
    });
    for (int t = 0; t < 4; ++t) {
      std::vector<double> col;
      for (const auto& a : vals) col.push_back(a[t]);
      r.series.push_back(make_series(fmt::format("{}[{}]", to_string(static_cast<StressTerm>(t)), v.id()),
                                     s.schedule, col, target[t], floor));
      r.checks.push_back(at_most(r.series.back().name + "_final_rel_error", r.series.back().final_rel_error,
                                 s.tol.force));
    }
  }
  return r;
}

ConvergenceReport counterexample_study(const StudySetup& setup) {
  StudySetup s = setup;
  s.profile = ProfileKind::gk;
  s.sequence = SequenceKind::lift;
  ConvergenceReport r;
  r.study = "counterexample";
  r.shape = s.shape.describe();
  r.schedule = s.schedule;
  base_provenance(r, s);
  const double beta = beta_limit(s.well_scale);
  r.provenance["beta"] = fmt::format("{:.17g}", beta);

  auto members = build_sequence(s);
  r.fields.emplace_back("phi", members.back().phi);
  std::vector<double> surf(members.size()), l1(members.size()), disc(members.size());
  parallel_for(static_cast<int>(members.size()), s.threads, [&](int k) {
    const auto& m = members[k];
    surf[k] = surface_term(m.sys, m.phi, m.xi) / s.params.surface_tension;
    l1[k] = l1_distance_to_indicator(m.phi, s.shape);
    disc[k] = discrepancy(m.phi, m.xi).l1;
  });
  const auto& g = *members.back().grid;
  const double P = s.shape.perimeter(g);
  r.series.push_back(make_series("surface_over_gamma0", s.schedule, surf, beta * P, s.tol.floor));
  r.series.push_back(make_series("l1_to_indicator", s.schedule, l1, 0.0, g.measure()));
  r.series.push_back(make_series("discrepancy_L1", s.schedule, disc, 0.0, P));
  r.checks.push_back(at_most("fitted_limit_rel_error", r.series[0].fit_rel_error, s.tol.fit,
                             fmt::format("fit L = {:.6g}, beta P = {:.6g}", r.series[0].fit.limit, beta * P)));
  r.checks.push_back(at_most("l1_final", l1.back(), s.tol.l1_fraction * g.measure()));
  r.checks.push_back(make_check("l1_monotone", r.series[1].monotone ? 1.0 : 0.0, 1.0, r.series[1].monotone));
  return r;
}

ConvergenceReport stress_identity_study(const StudySetup& s, int coarse_cells) {
  if (s.grid.radial || s.grid.dim != 2) throw DomainError("stress identity study runs on a 2D Cartesian box");
  ConvergenceReport r;
  r.study = "stress-identity";
  r.shape = "manufactured";
  base_provenance(r, s);

  const double cx = 0.5 * (s.grid.lo[0] + s.grid.hi[0]), cy = 0.5 * (s.grid.lo[1] + s.grid.hi[1]);
  const double Lx = 0.5 * (s.grid.hi[0] - s.grid.lo[0]), Ly = 0.5 * (s.grid.hi[1] - s.grid.lo[1]);
  const double pi = std::numbers::pi;
  const DielectricProfile diel{s.params.eps_p, s.params.eps_w, s.dielectric};
  // smooth manufactured fields in scaled coordinates X, Y in [-1, 1]
  struct Eval {
    double phi, px, py, psi, sx, sy, lap_psi;
  };
  auto eval = [&](const Point& x) {
    const double X = (x[0] - cx) / Lx, Y = (x[1] - cy) / Ly;
    Eval e;
    e.phi = 0.5 + 0.4 * std::sin(pi * X / 2) * std::cos(pi * Y / 3);
    e.px = 0.4 * (pi / 2) / Lx * std::cos(pi * X / 2) * std::cos(pi * Y / 3);
    e.py = -0.4 * (pi / 3) / Ly * std::sin(pi * X / 2) * std::sin(pi * Y / 3);
    e.psi = 0.3 * std::cos(pi * X / 2) * std::cos(pi * Y / 2) + 0.1 * X;
    e.sx = -0.3 * (pi / 2) / Lx * std::sin(pi * X / 2) * std::cos(pi * Y / 2) + 0.1 / Lx;
    e.sy = -0.3 * (pi / 2) / Ly * std::cos(pi * X / 2) * std::sin(pi * Y / 2);
    e.lap_psi = -0.3 * (pi * pi / 4) * (1 / (Lx * Lx) + 1 / (Ly * Ly)) * std::cos(pi * X / 2) * std::cos(pi * Y / 2);
    return e;
  };
  // one LJ centre outside the box: smooth, uncapped U inside
  SoluteAtom outside;
  outside.position = {s.grid.lo[0] - 2.0 * Lx, cy, 0.0};
  outside.lj_energy = 1.0;
  outside.lj_length = Lx;

  const double xi = s.schedule.front();
  std::array<std::array<double, 4>, 2> sup{};
  std::vector<double> hs;
  for (int level = 0; level < 2; ++level) {
    const int cells = coarse_cells << level;
    auto grid = StructuredGrid::cartesian(2, s.grid.lo, s.grid.hi, {cells, cells, 0});
    hs.push_back(grid->max_h());
    PhaseFieldSystem sys = PhaseFieldSystem::build(grid, s.params, {}, s.ionic, s.dielectric, s.u_cap);
    sys.atoms = {outside};
    std::vector<double> phi(grid->node_count()), psi(grid->node_count()), u(grid->node_count()),
        rho(grid->node_count());
    for (std::size_t i = 0; i < grid->node_count(); ++i) {
      const Point x = grid->coord(i);
      const Eval e = eval(x);
      phi[i] = e.phi;
      psi[i] = e.psi;
      u[i] = eval_U_capped(x, sys.atoms, s.u_cap);
      const double eps = eval_eps(e.phi, diel), deps = eval_eps_prime(e.phi, diel);
      const double bp = s.ionic.empty() ? 0.0 : eval_B_prime(e.psi, s.ionic, s.params.kBT);
      rho[i] = -(deps * (e.px * e.sx + e.py * e.sy) + eps * e.lap_psi) + (e.phi - 1) * (e.phi - 1) * bp;
    }
    sys.U = ScalarField(grid, u);
    sys.rho = ScalarField(grid, rho);
    const ScalarField phif(grid, phi), psif(grid, psi);
    const auto st = stress_set(sys, phif, xi, psif);
    const auto fs = force_densities(sys, phif, xi, psif);
    const auto res = divergence_residual(sys, st, fs, phif, psif, 2);
    sup[level] = res.sup;
  }
  for (int t = 0; t < 4; ++t) {
    const std::string name = to_string(static_cast<StressTerm>(t));
    Series sr;
    sr.name = "residual_" + name;
    sr.xi = hs;
    sr.values = {sup[0][t], sup[1][t]};
    sr.targets = {0.0, 0.0};
    sr.finish(1.0);
    r.series.push_back(sr);
    const double order = std::log2(sup[0][t] / sup[1][t]);
    r.checks.push_back(at_least("order_" + name, order, s.tol.order,
                                fmt::format("sup residual {:.3e} -> {:.3e}", sup[0][t], sup[1][t])));
  }
  r.schedule = hs;
  return r;
}

ConvergenceReport variation_study(const StudySetup& s, int samples, double step) {
  ConvergenceReport r;
  r.study = "variation";
  r.shape = s.shape.describe();
  base_provenance(r, s);
  const double xi = s.schedule.back();
  r.schedule = {xi};
  const GridPtr grid = s.grid.build(xi);
  const PhaseFieldSystem sys = s.system(grid);
  const ScalarField lifted = s.lift(xi, grid);
  const ScalarField phi(grid, lifted.data());  // plain field: grid differences only

  const PBSolution pb = solve_pb(sys, phi);
  const ScalarField dF = variation_delta_F(sys, phi, xi, pb);
  const auto& w = grid->weights();

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dim = grid->is_radial() ? 1 : grid->dim();
  std::vector<double> analytic, fd;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    // C^2 bump (1 - (d/a)^2)^3 with centre and radius drawn inside the box
    Point c{0, 0, 0};
    double extent = kInfinity;
    for (int d = 0; d < dim; ++d) {
      const double lo = grid->is_radial() ? 0.0 : grid->lo(d), hi = grid->hi(d);
      c[d] = lo + (0.25 + 0.5 * unit(rng)) * (hi - lo);
      extent = std::min({extent, c[d] - lo, hi - c[d]});
    }
    if (grid->is_radial()) extent = grid->hi(0) - c[0];
    const double a = (0.3 + 0.6 * unit(rng)) * extent;
    const double amp = unit(rng) < 0.5 ? -1.0 : 1.0;
    std::vector<double> eta(grid->node_count(), 0.0);
    for (std::size_t i = 0; i < eta.size(); ++i) {
      const double q = distance(grid->coord(i), c) / a;
      if (q < 1) eta[i] = amp * std::pow(1 - q * q, 3);
    }
    double an = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) an += w[i] * dF[i] * eta[i];
    std::vector<double> plus = phi.data(), minus = phi.data();
    for (std::size_t i = 0; i < eta.size(); ++i) {
      plus[i] += step * eta[i];
      minus[i] -= step * eta[i];
    }
    const double fp = evaluate_F_xi(sys, ScalarField(grid, plus), xi).total;
    const double fm = evaluate_F_xi(sys, ScalarField(grid, minus), xi).total;
    const double d = (fp - fm) / (2 * step);
    analytic.push_back(an);
    fd.push_back(d);
    worst = std::max(worst, rel_error(an, d, s.tol.floor));
  }
  Series sr;
  sr.name = "directional_derivative";
  for (int k = 0; k < samples; ++k) sr.xi.push_back(k + 1);
  sr.values = analytic;
  sr.targets = fd;
  sr.finish(s.tol.floor);
  r.series.push_back(sr);
  r.checks.push_back(at_most("max_rel_error", worst, s.tol.variation));
  return r;
}

ConvergenceReport dielectric_identity_study(const StudySetup& s) {
  if (!s.grid.radial || s.shape.kind() != ShapeKind::ball)
    throw DomainError("dielectric identity study needs a radial grid and a ball");
  ConvergenceReport r;
  r.study = "dielectric-identity";
  r.shape = s.shape.describe();
  base_provenance(r, s);
  const double R = s.shape.radius();
  Cutoff c = s.cutoff;
  c.center = {0, 0, 0};
  const TestField v = TestField::radial(c);

  std::vector<double> hs, bulk, surface;
  for (int level : {64, 128}) {
    const double h = R / level;
    const auto grid = StructuredGrid::radial(s.grid.rmax, static_cast<int>(std::lround(s.grid.rmax / h)));
    const PhaseFieldSystem sys = s.system(grid);
    const PBSolution sharp = solve_pb_sharp(sys, s.shape);
    const auto [b, sf] = dielectric_force_identity_check(sys, s.shape, sharp, v);
    hs.push_back(h);
    bulk.push_back(b);
    surface.push_back(sf);
  }
  Series sr;
  sr.name = "bulk_vs_surface";
  sr.xi = hs;
  sr.values = bulk;
  sr.targets = surface;
  sr.finish(s.tol.floor);
  r.series.push_back(sr);
  r.schedule = hs;
  const double g0 = rel_error(bulk[0], surface[0], s.tol.floor), g1 = rel_error(bulk[1], surface[1], s.tol.floor);
  r.checks.push_back(at_most("gap_R/64", g0, s.tol.identity));
  r.checks.push_back(at_most("gap_R/128", g1, s.tol.identity));
  r.checks.push_back(make_check("gap_shrinks", g1, g0, g1 <= g0));
  return r;
}

ConvergenceReport run_named_study(const StudySetup& setup) {
  const auto& k = setup.study;
  if (k == "energy") return energy_component_study(setup);
  if (k == "equipartition") return equipartition_study(setup);
  if (k == "ch-force") return ch_force_study(setup);
  if (k == "solvation-force") return solvation_force_study(setup);
  if (k == "counterexample") return counterexample_study(setup);
  if (k == "stress-identity") return stress_identity_study(setup);
  if (k == "variation") return variation_study(setup);
  if (k == "dielectric-identity") return dielectric_identity_study(setup);
  throw DomainError(fmt::format("unknown study '{}'", k));
}

}  // namespace solvate
