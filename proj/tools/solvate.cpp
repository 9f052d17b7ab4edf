#include <iostream>

#include <CLI11.hpp>

#include "solvate/errors.hpp"
#include "solvate/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Phase-field solvation free-energy laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  int threads = 1;
  double tol_scale = 1.0;
  long long seed = -1;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"pb-solve", "single Poisson-Boltzmann solve (diffuse or sharp)"},
      {"energy-study", "component-wise energy convergence sweep"},
      {"equipartition", "equi-partition discrepancy sweep"},
      {"ch-force", "Cahn-Hilliard stress pairings against surface targets"},
      {"solvation-force", "all four force pairings against sharp boundary forces"},
      {"counterexample", "gk(a) profile lifts and the beta limit"},
      {"relax", "gradient-flow relaxation with xi-continuation"},
      {"profile-dump", "tabulate an interface profile"},
      {"study", "run the study named in the config"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads for independent sweep members")->check(CLI::PositiveNumber);
    sub->add_option("--tol-scale", tol_scale, "multiply every acceptance tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override the config seed")->check(CLI::NonNegativeNumber);
  }

  CLI11_PARSE(app, argc, argv);

  solvate::RunOptions opt;
  opt.command = app.get_subcommands().front()->get_name();
  if (!out.empty()) opt.out = out;
  opt.threads = threads;
  opt.tol_scale = tol_scale;
  if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);

  try {
    auto cfg = solvate::load_config(config_path);
    return solvate::run_experiment(std::move(cfg), opt, std::cout);
  } catch (const solvate::ValidationError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
