#pragma once

// Text tables and CSV/JSON export of convergence reports. Everything here is
// pure: the same report always renders to the same bytes.

#include <string>

#include "solvate/converge.hpp"

namespace solvate {

struct Rendered {
  std::string table;  // aligned text, one sub-table per series
  std::string csv;    // tidy: study,series,xi,value,target,rel_error
};

Rendered render(const ConvergenceReport& report);

std::string render_table(const ConvergenceReport& report);
std::string tidy_csv(const ConvergenceReport& report);
/// Energy breakdown rows (plus the sharp target row) when present, else the tidy CSV.
std::string rows_csv(const ConvergenceReport& report);
std::string report_json(const ConvergenceReport& report, std::uint64_t config_hash);

}  // namespace solvate
