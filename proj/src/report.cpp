#include "solvate/report.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

namespace solvate {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

// Local exponent through rows k-2, k-1, k.
double local_exponent(const Series& s, std::size_t k) {
  if (k < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> xi(s.xi.begin() + k - 2, s.xi.begin() + k + 1);
  const std::vector<double> v(s.values.begin() + k - 2, s.values.begin() + k + 1);
  return richardson_fit(xi, v).exponent;
}

}  // namespace

std::string render_table(const ConvergenceReport& r) {
  std::string out = fmt::format("study: {}   shape: {}   status: {}\n", r.study, r.shape, r.status);
  for (const auto& s : r.series) {
    const bool with_p = s.values.size() >= 3;
    out += fmt::format("\n[{}]\n", s.name);
    out += fmt::format("{:>12} {:>18} {:>18} {:>11}", "xi", "value", "target", "rel-err");
    if (with_p) out += fmt::format(" {:>7}", "p");
    out += "\n";
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      const double floor = 1e-300;
      out += fmt::format("{:>12.6g} {:>18.10g} {:>18.10g} {:>11.3e}", s.xi[k], s.values[k], s.targets[k],
                         rel_error(s.values[k], s.targets[k], floor));
      if (with_p) {
        const double p = local_exponent(s, k);
        out += std::isnan(p) ? fmt::format(" {:>7}", "-") : fmt::format(" {:>7.3f}", p);
      }
      out += "\n";
    }
    if (with_p)
      out += fmt::format("fit: limit {:.10g}  p {}  rel-err {:.3e}\n", s.fit.limit,
                         std::isnan(s.fit.exponent) ? std::string("-") : fmt::format("{:.3f}", s.fit.exponent),
                         s.fit_rel_error);
  }
  if (!r.checks.empty()) {
    out += "\nchecks:\n";
    for (const auto& c : r.checks)
      out += fmt::format("  {:<4} {:<44} {:>12.4e} (threshold {:.4e}){}\n", c.pass ? "ok" : "FAIL", c.name, c.value,
                         c.threshold, c.detail.empty() ? "" : "  " + c.detail);
  }
  out += fmt::format("\nresult: {}\n", r.passed() ? "pass" : "fail");
  return out;
}

std::string tidy_csv(const ConvergenceReport& r) {
  std::string out = "study,series,xi,value,target,rel_error\n";
  for (const auto& s : r.series)
    for (std::size_t k = 0; k < s.values.size(); ++k)
      out += fmt::format("{},{},{},{},{},{}\n", r.study, s.name, num(s.xi[k]), num(s.values[k]), num(s.targets[k]),
                         num(rel_error(s.values[k], s.targets[k], 1e-300)));
  return out;
}

std::string rows_csv(const ConvergenceReport& r) {
  if (r.rows.empty()) return tidy_csv(r);
  std::string out = EnergyBreakdown::csv_header() + "\n";
  for (const auto& row : r.rows) out += row.csv_row() + "\n";
  if (r.target_row) out += r.target_row->csv_row() + "\n";
  return out;
}

Rendered render(const ConvergenceReport& r) { return {render_table(r), tidy_csv(r)}; }

std::string report_json(const ConvergenceReport& r, std::uint64_t config_hash) {
  using nlohmann::json;
  auto number = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["study"] = r.study;
  j["shape"] = r.shape;
  j["status"] = r.status;
  j["passed"] = r.passed();
  j["config_hash"] = fmt::format("{:016x}", config_hash);
  j["schedule"] = r.schedule;
  j["provenance"] = r.provenance;
  json rows = json::array();
  auto row_json = [&](const EnergyBreakdown& e) {
    return json{{"label", e.label.empty() ? fmt::format("{}", e.xi) : e.label},
                {"volume", number(e.volume)},
                {"surface", number(e.surface)},
                {"vdw", number(e.vdw)},
                {"ele", number(e.ele)},
                {"total", number(e.total)},
                {"discrepancy_L1", number(e.discrepancy_L1)}};
  };
  for (const auto& e : r.rows) rows.push_back(row_json(e));
  j["rows"] = rows;
  if (r.target_row) j["target"] = row_json(*r.target_row);
  json series = json::array();
  for (const auto& s : r.series) {
    json vals = json::array(), tg = json::array();
    for (double v : s.values) vals.push_back(number(v));
    for (double v : s.targets) tg.push_back(number(v));
    series.push_back({{"name", s.name},
                      {"xi", s.xi},
                      {"values", vals},
                      {"targets", tg},
                      {"final_rel_error", number(s.final_rel_error)},
                      {"fit", {{"limit", number(s.fit.limit)},
                               {"exponent", number(s.fit.exponent)},
                               {"converged", s.fit.converged}}},
                      {"fit_rel_error", number(s.fit_rel_error)},
                      {"monotone", s.monotone}});
  }
  j["series"] = series;
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(
        {{"name", c.name}, {"value", number(c.value)}, {"threshold", number(c.threshold)}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

}  // namespace solvate
