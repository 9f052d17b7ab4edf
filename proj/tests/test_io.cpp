#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "solvate/config.hpp"
#include "solvate/errors.hpp"
#include "solvate/field_io.hpp"
#include "solvate/report.hpp"
#include "solvate/runner.hpp"

using namespace solvate;
namespace fs = std::filesystem;

namespace {

const char* kPlaneConfig =
    "study = equipartition\n"
    "seed = 3\n"
    "[model]\npressure = 0.2\nsurface_tension = 1.5\n"
    "[grid]\nkind = cartesian\ndim = 2\nlo = -1 0 0\nhi = 1 1 0\nfixed_cells = 0 8 0\n"
    "[shape]\nkind = plane\nnormal = 1 0 0\noffset = 0\n"
    "[schedule]\nxi = 0.2 0.1 0.05\n"
    "[sweep]\nprofile = recovery\n";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& m : v)
    if (m.find(s) != std::string::npos) return true;
  return false;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / fs::path("solvate_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Config, ParsesSectionsIntoSetup) {
  const auto cfg = parse_config(kPlaneConfig);
  EXPECT_EQ(cfg.setup.study, "equipartition");
  EXPECT_EQ(cfg.setup.seed, 3u);
  EXPECT_DOUBLE_EQ(cfg.setup.params.pressure, 0.2);
  EXPECT_DOUBLE_EQ(cfg.setup.params.surface_tension, 1.5);
  EXPECT_EQ(cfg.setup.grid.fixed_cells[1], 8);
  EXPECT_EQ(cfg.setup.shape.kind(), ShapeKind::plane);
  EXPECT_EQ(cfg.setup.schedule.size(), 3u);
  EXPECT_EQ(cfg.setup.profile, ProfileKind::recovery);
  EXPECT_EQ(cfg.hash, text_hash(kPlaneConfig));
}

TEST(Config, NumberedIonsAndAtoms) {
  const auto cfg = parse_config(
      "[ions]\nspecies1 = 0.1 1\nspecies2 = 0.05 -2\n"
      "[atoms]\natom1 = 0 0 0 1.5 0.2 0.9 0.3\n"
      "[grid]\nkind = radial\nrmax = 4\n"
      "[shape]\nkind = ball\ncenter = 0 0 0\nradius = 2\n");
  ASSERT_EQ(cfg.setup.ionic.species().size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.setup.ionic.species()[1].charge, -2.0);
  ASSERT_EQ(cfg.setup.atoms.size(), 1u);
  EXPECT_DOUBLE_EQ(cfg.setup.atoms[0].charge, 1.5);
  EXPECT_DOUBLE_EQ(cfg.setup.atoms[0].lj_length, 0.9);
  EXPECT_DOUBLE_EQ(cfg.setup.atoms[0].smear_width, 0.3);
}

TEST(Config, EqualPermittivitiesRejected) {
  const auto v = violations_of(std::string(kPlaneConfig) + "[model]\n");  // duplicate section is itself an error
  EXPECT_FALSE(v.empty());
  const auto w = violations_of("[model]\neps_p = 4\neps_w = 4\n[grid]\nkind = radial\nrmax = 3\n");
  EXPECT_TRUE(mentions(w, "positive and distinct"));
}

TEST(Config, EveryProblemIsCollected) {
  const auto v = violations_of(
      "colour = blue\n[model]\npressure = -1\nbogus = 2\n[grid]\nkind = hexagonal\n[schedule]\nxi = 0.1 0.2\n"
      "[ions]\nspecies1 = 0.1 1\n");
  EXPECT_TRUE(mentions(v, "colour"));
  EXPECT_TRUE(mentions(v, "bogus"));
  EXPECT_TRUE(mentions(v, "pressure"));
  EXPECT_TRUE(mentions(v, "hexagonal"));
  EXPECT_TRUE(mentions(v, "[schedule]"));
  EXPECT_TRUE(mentions(v, "neutral"));
}

TEST(Config, MalformedNumbers) {
  EXPECT_TRUE(mentions(violations_of("[model]\npressure = fast\n"), "not a number"));
  EXPECT_TRUE(mentions(violations_of("[grid]\nlo = 1 2\n"), "three numbers"));
}

TEST(Config, HashIsStableAndSensitive) {
  EXPECT_EQ(text_hash("abc"), text_hash("abc"));
  EXPECT_NE(text_hash("abc"), text_hash("abd"));
  // FNV-1a reference value
  EXPECT_EQ(text_hash(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(text_hash("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Report, CsvAndJsonShapes) {
  auto cfg = parse_config(kPlaneConfig);
  const auto r = run_named_study(cfg.setup);
  const auto csv = tidy_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "study,series,xi,value,target,rel_error");
  const auto j = nlohmann::json::parse(report_json(r, 0x1234));
  EXPECT_EQ(j["config_hash"], "0000000000001234");
  EXPECT_EQ(j["study"], "equipartition");
  EXPECT_EQ(j["passed"], r.passed());
  EXPECT_EQ(render_table(r), render(r).table);
  EXPECT_NE(render_table(r).find("result: pass"), std::string::npos);
}

TEST(Report, NonFiniteNumbersBecomeNull) {
  ConvergenceReport r;
  r.study = "x";
  Series s;
  s.name = "v";
  s.xi = {0.1};
  s.values = {std::numeric_limits<double>::quiet_NaN()};
  s.targets = {1.0};
  r.series.push_back(s);
  const auto j = nlohmann::json::parse(report_json(r, 0));
  EXPECT_TRUE(j["series"][0]["values"][0].is_null());
}

TEST(Runner, CommandMapping) {
  EXPECT_EQ(study_for_command("energy-study", "x"), "energy");
  EXPECT_EQ(study_for_command("study", "counterexample"), "counterexample");
  EXPECT_EQ(study_for_command("relax", "energy"), "relax");
  EXPECT_THROW(study_for_command("dance", "energy"), DomainError);
}

TEST(Runner, WritesArtifactsCarryingTheHash) {
  TempDir dir;
  RunOptions opt;
  opt.command = "study";
  opt.out = dir.path;
  std::ostringstream log;
  const auto cfg = parse_config(kPlaneConfig);
  EXPECT_EQ(run_experiment(cfg, opt, log), 0);
  const std::string tag = fmt::format("{:016x}", cfg.hash);
  EXPECT_EQ(slurp(dir.path / "rows.csv").rfind("# config_hash=" + tag, 0), 0u);
  EXPECT_NE(slurp(dir.path / "report.json").find(tag), std::string::npos);
  EXPECT_NE(slurp(dir.path / "provenance.txt").find(tag), std::string::npos);
  EXPECT_NE(slurp(dir.path / "provenance.txt").find(kPlaneConfig), std::string::npos);
  bool any_field = false;
  for (const auto& e : fs::directory_iterator(dir.path / "fields")) {
    any_field = true;
    EXPECT_EQ(read_field_binary(e.path()).config_hash, cfg.hash);
  }
  EXPECT_TRUE(any_field);
  EXPECT_NE(log.str().find("surface_over_gamma0"), std::string::npos);
}

TEST(Runner, SeedOverrideChangesTheHashOnly) {
  TempDir dir;
  const auto cfg = parse_config(kPlaneConfig);
  RunOptions a;
  a.command = "study";
  a.out = dir.path / "a";
  RunOptions b = a;
  b.out = dir.path / "b";
  b.seed = 99;
  std::ostringstream log;
  run_experiment(cfg, a, log);
  run_experiment(cfg, b, log);
  auto body = [](const std::string& s) { return s.substr(s.find('\n')); };
  const auto ca = slurp(dir.path / "a" / "rows.csv"), cb = slurp(dir.path / "b" / "rows.csv");
  EXPECT_NE(ca, cb);
  EXPECT_EQ(body(ca), body(cb));
}

TEST(Runner, PbSolveAndProfileDump) {
  TempDir dir;
  const auto cfg = parse_config(
      "[atoms]\natom1 = 0 0 0 1 0\n[grid]\nkind = radial\nrmax = 6\n[shape]\nkind = ball\ncenter = 0 0 0\nradius = 2\n"
      "[schedule]\nxi = 0.2\n[pb]\nmode = sharp\n");
  RunOptions opt;
  opt.command = "pb-solve";
  opt.out = dir.path / "pb";
  std::ostringstream log;
  EXPECT_EQ(run_experiment(cfg, opt, log), 0);
  const auto j = nlohmann::json::parse(slurp(dir.path / "pb" / "report.json"));
  EXPECT_EQ(j["mode"], "sharp");
  EXPECT_GT(j["f_ele"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(dir.path / "pb" / "fields" / "psi.bin"));

  opt.command = "profile-dump";
  opt.out = dir.path / "prof";
  EXPECT_EQ(run_experiment(cfg, opt, log), 0);
  const auto rows = slurp(dir.path / "prof" / "rows.csv");
  EXPECT_NE(rows.find("\ns,g\n"), std::string::npos);
}
