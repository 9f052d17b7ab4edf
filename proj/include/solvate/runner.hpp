#pragma once

// Executes one configured experiment and writes its artifacts:
// report.json, rows.csv, fields/*.bin and provenance.txt.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "solvate/config.hpp"

namespace solvate {

struct RunOptions {
  std::string command;  // subcommand name
  std::optional<std::filesystem::path> out;
  int threads = 1;
  double tol_scale = 1.0;
  std::optional<std::uint64_t> seed;
};

/// Maps a subcommand to a study name ("energy-study" -> "energy"); "study" keeps the config's choice.
std::string study_for_command(const std::string& command, const std::string& configured);

/// Runs the experiment; returns the process exit status (0 iff every check passes).
/// The human-readable table goes to `log`.
int run_experiment(ExperimentConfig config, const RunOptions& options, std::ostream& log);

}  // namespace solvate
