#include "solvate/runner.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "solvate/errors.hpp"
#include "solvate/field_io.hpp"
#include "solvate/quadrature.hpp"
#include "solvate/report.hpp"

namespace solvate {

namespace {

namespace fs = std::filesystem;

std::string hash_line(std::uint64_t h) { return fmt::format("# config_hash={:016x}\n", h); }

void write_provenance(const fs::path& out, const ExperimentConfig& cfg, const RunOptions& opt,
                      const std::string& study, const std::map<std::string, std::string>& prov, std::uint64_t hash) {
  std::string s = hash_line(hash);
  s += fmt::format("command: {}\nstudy: {}\nseed: {}\ntol_scale: {}\n", opt.command, study, cfg.setup.seed,
                   opt.tol_scale);
  for (const auto& [k, v] : prov) s += fmt::format("{}: {}\n", k, v);
  s += "config:\n" + cfg.text;
  if (!cfg.text.empty() && cfg.text.back() != '\n') s += "\n";
  write_file_atomic(out / "provenance.txt", s);
}

void write_report(const fs::path& out, const ConvergenceReport& r, std::uint64_t hash) {
  write_file_atomic(out / "report.json", report_json(r, hash));
  write_file_atomic(out / "rows.csv", hash_line(hash) + rows_csv(r));
  for (const auto& [name, field] : r.fields) write_field_binary(field, out / "fields" / (name + ".bin"), hash);
}

ConvergenceReport relax_report(const StudySetup& s, const fs::path& out, std::uint64_t hash) {
  ConvergenceReport r;
  r.study = "relax";
  r.shape = s.shape.describe();
  r.schedule = s.schedule;
  r.provenance["flow"] = "L2 gradient flow, semi-implicit (surface Laplacian implicit)";
  r.provenance["pb_refresh"] = fmt::format("{}", s.flow.pb_refresh);
  r.provenance["flow_tol"] = fmt::format("{}", s.flow_tol);
  const GridPtr g0 = s.grid.build(s.schedule.front());
  const auto states = xi_continuation([&](double xi) { return s.system(s.grid.build(xi)); }, s.schedule,
                                      s.lift(s.schedule.front(), g0), s.flow_tol, s.flow);
  Series grad;
  grad.name = "grad_norm";
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& st = states[k];
    r.rows.push_back(st.energy);
    grad.xi.push_back(st.xi);
    grad.values.push_back(st.grad_norm);
    grad.targets.push_back(0.0);
    r.checks.push_back({fmt::format("converged[xi={}]", st.xi), st.grad_norm, s.flow_tol, !st.partial,
                        fmt::format("{} steps", st.step)});
    write_file_atomic(out / fmt::format("flow_{}.csv", k + 1), hash_line(hash) + flow_log_csv(st));
    r.fields.emplace_back(fmt::format("phi_{}", k + 1), st.phi);
  }
  grad.finish(1.0);
  r.series.push_back(grad);
  return r;
}

double line_energy(const Profile& p) {
  const double xi = p.spec().xi;
  double lo = p.support_lo(), hi = p.support_hi();
  if (!std::isfinite(lo)) lo = -6.0 * xi;
  if (!std::isfinite(hi)) hi = 6.0 * xi;
  auto f = [&](double s) {
    const double g = p.value(s), d = p.d1(s);
    return 0.5 * xi * d * d + eval_W(g) / xi;
  };
  return integrate_adaptive(f, lo, hi, 1e-12);
}

}  // namespace

std::string study_for_command(const std::string& command, const std::string& configured) {
  static const std::map<std::string, std::string> table{
      {"energy-study", "energy"},       {"equipartition", "equipartition"}, {"ch-force", "ch-force"},
      {"solvation-force", "solvation-force"}, {"counterexample", "counterexample"}, {"pb-solve", "pb-solve"},
      {"relax", "relax"},               {"profile-dump", "profile-dump"}};
  if (command == "study") return configured;
  auto it = table.find(command);
  if (it == table.end()) throw DomainError(fmt::format("unknown command '{}'", command));
  return it->second;
}

int run_experiment(ExperimentConfig cfg, const RunOptions& opt, std::ostream& log) {
  auto& s = cfg.setup;
  std::uint64_t hash = cfg.hash;
  if (opt.seed) {
    s.seed = *opt.seed;
    hash = text_hash(cfg.text + fmt::format("\n# seed override {}\n", *opt.seed));
  }
  if (opt.threads < 1) throw DomainError("--threads must be at least 1");
  s.threads = opt.threads;
  s.tol.scale(opt.tol_scale);
  const fs::path out = opt.out ? *opt.out : fs::path(cfg.output_dir);
  fs::create_directories(out / "fields");
  const std::string study = study_for_command(opt.command, s.study);

  if (study == "pb-solve") {
    const double xi = s.schedule.front();
    const GridPtr grid = s.grid.build(xi);
    const PhaseFieldSystem sys = s.system(grid);
    const PBSolution sol = cfg.pb_mode == "sharp" ? solve_pb_sharp(sys, s.shape) : solve_pb(sys, s.lift(xi, grid));
    auto j = nlohmann::json::parse(sol.diagnostics_json());
    j["config_hash"] = fmt::format("{:016x}", hash);
    j["mode"] = cfg.pb_mode;
    j["xi"] = xi;
    j["grid"] = grid->describe();
    write_file_atomic(out / "report.json", j.dump(2) + "\n");
    write_file_atomic(out / "rows.csv",
                      hash_line(hash) + fmt::format("quantity,value\nf_ele,{:.17g}\niterations,{}\nresidual,{:.17g}\n",
                                                    sol.f_ele(), sol.iterations, sol.residual));
    write_field_binary(sol.psi, out / "fields" / "psi.bin", hash);
    write_provenance(out, cfg, opt, study, {{"grid", grid->describe()}, {"pb_mode", cfg.pb_mode}}, hash);
    log << fmt::format("F_ele = {:.12g}  ({} Newton iterations, residual {:.3e})\n", sol.f_ele(), sol.iterations,
                       sol.residual);
    return 0;
  }

  if (study == "profile-dump") {
    const double xi = s.schedule.front();
    const Profile p = s.profile == ProfileKind::gk         ? Profile::gk(xi, s.well_scale)
                      : s.profile == ProfileKind::recovery ? Profile::recovery(xi)
                                                           : Profile::canonical(xi);
    ConvergenceReport r;
    r.study = "profile-dump";
    r.schedule = {xi};
    r.provenance["profile"] = to_string(s.profile);
    r.provenance["width"] = fmt::format("{:.17g}", p.width());
    const double e = line_energy(p);
    r.provenance["line_energy"] = fmt::format("{:.17g}", e);
    write_file_atomic(out / "report.json", report_json(r, hash));
    write_file_atomic(out / "rows.csv", hash_line(hash) + p.csv());
    write_provenance(out, cfg, opt, study, r.provenance, hash);
    log << fmt::format("{} profile at xi = {}: width {:.6g}, line energy {:.12g}\n", to_string(s.profile), xi,
                       p.width(), e);
    return 0;
  }

  const ConvergenceReport r = study == "relax" ? relax_report(s, out, hash) : run_named_study(s);
  write_report(out, r, hash);
  write_provenance(out, cfg, opt, study, r.provenance, hash);
  log << render_table(r);
  return r.passed() ? 0 : 1;
}

}  // namespace solvate
