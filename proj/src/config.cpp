#include "solvate/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "solvate/errors.hpp"

namespace solvate {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"", {"study", "seed", "output"}},
      {"model",
       {"pressure", "surface_tension", "solvent_density", "eps_p", "eps_w", "kBT", "dielectric", "u_cap",
        "far_field"}},
      {"ions", {}},   // speciesN
      {"atoms", {}},  // atomN
      {"grid", {"kind", "dim", "lo", "hi", "rmax", "h_per_xi", "fixed_cells"}},
      {"shape", {"kind", "center", "radius", "normal", "offset", "lower", "upper"}},
      {"schedule", {"xi"}},
      {"sweep",
       {"sequence", "profile", "well_scale", "sharp_refine", "flow_tol", "flow_max_steps", "flow_dt0",
        "pb_refresh", "cutoff_r1", "cutoff_r2", "cutoff_inner1", "cutoff_inner2", "polynomial_fields"}},
      {"pb", {"mode", "tol", "max_iters", "max_halvings", "c_bound", "check_bound"}},
      {"tolerances",
       {"volume", "surface", "vdw", "ele", "fit", "force", "equipartition_ratio", "plateau", "l1_fraction",
        "identity", "order", "variation"}},
  };
  return keys;
}

bool numbered_key(const std::string& key, const std::string& prefix, int& index) {
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) return false;
  const std::string rest = key.substr(prefix.size());
  if (rest.find_first_not_of("0123456789") != std::string::npos) return false;
  index = std::stoi(rest);
  return true;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::vector<std::string> errors;

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const std::string path = section.empty() ? key : section + "." + key;
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key, const std::string& text) {
    std::istringstream in(text);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        errors.push_back(fmt::format("[{}] {}: '{}' is not a number", section, key, tok));
        return {};
      }
    }
    return out;
  }

  void get(const std::string& section, const std::string& key, double& target) {
    if (auto v = raw(section, key)) {
      const std::size_t before = errors.size();
      auto n = numbers(section, key, *v);
      if (n.size() == 1)
        target = n[0];
      else if (errors.size() == before)
        errors.push_back(fmt::format("[{}] {}: expected one number", section, key));
    }
  }

  void get(const std::string& section, const std::string& key, int& target) {
    double d = target;
    get(section, key, d);
    if (d != std::floor(d)) errors.push_back(fmt::format("[{}] {}: expected an integer", section, key));
    target = static_cast<int>(d);
  }

  void get(const std::string& section, const std::string& key, Point& target) {
    if (auto v = raw(section, key)) {
      auto n = numbers(section, key, *v);
      if (n.size() != 3) {
        errors.push_back(fmt::format("[{}] {}: expected three numbers", section, key));
        return;
      }
      target = {n[0], n[1], n[2]};
    }
  }

  void get(const std::string& section, const std::string& key, std::string& target) {
    if (auto v = raw(section, key)) target = *v;
  }

  void get(const std::string& section, const std::string& key, bool& target) {
    if (auto v = raw(section, key)) {
      if (*v == "true" || *v == "1")
        target = true;
      else if (*v == "false" || *v == "0")
        target = false;
      else
        errors.push_back(fmt::format("[{}] {}: expected true or false", section, key));
    }
  }

 private:
  const pt::ptree& tree_;
};

void check_unknown(const pt::ptree& tree, std::vector<std::string>& errors) {
  const auto& keys = known_keys();
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      if (!keys.at("").count(name)) errors.push_back(fmt::format("unknown top-level key '{}'", name));
      continue;
    }
    auto it = keys.find(name);
    if (it == keys.end() || name.empty()) {
      errors.push_back(fmt::format("unknown section [{}]", name));
      continue;
    }
    for (const auto& [key, child] : node) {
      int idx = 0;
      if (name == "ions" && numbered_key(key, "species", idx)) continue;
      if (name == "atoms" && numbered_key(key, "atom", idx)) continue;
      if (!it->second.count(key)) errors.push_back(fmt::format("unknown key '{}' in [{}]", key, name));
    }
  }
}

}  // namespace

std::uint64_t text_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError({fmt::format("config syntax: {}", e.message())});
  }

  ExperimentConfig cfg;
  cfg.text = text;
  cfg.hash = text_hash(text);
  auto& s = cfg.setup;

  std::vector<std::string> errors;
  check_unknown(tree, errors);
  Reader rd(tree);

  rd.get("", "study", s.study);
  double seed = static_cast<double>(s.seed);
  rd.get("", "seed", seed);
  if (seed < 0) rd.errors.push_back("seed must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  rd.get("", "output", cfg.output_dir);

  // [model]
  rd.get("model", "pressure", s.params.pressure);
  rd.get("model", "surface_tension", s.params.surface_tension);
  rd.get("model", "solvent_density", s.params.solvent_density);
  rd.get("model", "eps_p", s.params.eps_p);
  rd.get("model", "eps_w", s.params.eps_w);
  rd.get("model", "kBT", s.params.kBT);
  rd.get("model", "u_cap", s.u_cap);
  std::string diel = "quintic", far = "zero";
  rd.get("model", "dielectric", diel);
  rd.get("model", "far_field", far);
  if (diel == "quintic")
    s.dielectric = DielectricKind::quintic;
  else if (diel == "cubic")
    s.dielectric = DielectricKind::cubic;
  else
    rd.errors.push_back(fmt::format("[model] dielectric: unknown kind '{}'", diel));
  if (far == "zero")
    s.far_field = FarField::zero;
  else if (far == "screened_coulomb")
    s.far_field = FarField::screened_coulomb;
  else
    rd.errors.push_back(fmt::format("[model] far_field: unknown kind '{}'", far));

  // [ions], [atoms]: numbered entries in index order
  if (auto ions = tree.get_child_optional("ions")) {
    std::map<int, IonSpecies> species;
    for (const auto& [key, node] : *ions) {
      int idx = 0;
      if (!numbered_key(key, "species", idx)) continue;
      auto n = rd.numbers("ions", key, node.data());
      if (n.size() != 2) {
        rd.errors.push_back(fmt::format("[ions] {}: expected 'concentration charge'", key));
        continue;
      }
      species[idx] = {n[0], n[1]};
    }
    std::vector<IonSpecies> list;
    for (auto& [k, sp] : species) list.push_back(sp);
    if (!list.empty()) {
      try {
        s.ionic = IonicModel(list);
      } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) rd.errors.push_back(v);
      }
    }
  }
  if (auto atoms = tree.get_child_optional("atoms")) {
    std::map<int, SoluteAtom> list;
    for (const auto& [key, node] : *atoms) {
      int idx = 0;
      if (!numbered_key(key, "atom", idx)) continue;
      auto n = rd.numbers("atoms", key, node.data());
      if (n.size() < 5 || n.size() > 7) {
        rd.errors.push_back(fmt::format("[atoms] {}: expected 'x y z charge lj_energy [lj_length [smear_width]]'", key));
        continue;
      }
      SoluteAtom a;
      a.position = {n[0], n[1], n[2]};
      a.charge = n[3];
      a.lj_energy = n[4];
      if (n.size() > 5) a.lj_length = n[5];
      if (n.size() > 6) a.smear_width = n[6];
      list[idx] = a;
    }
    for (auto& [k, a] : list) s.atoms.push_back(a);
  }

  // [grid]
  std::string gkind = "cartesian";
  rd.get("grid", "kind", gkind);
  if (gkind != "cartesian" && gkind != "radial") rd.errors.push_back(fmt::format("[grid] kind: unknown '{}'", gkind));
  s.grid.radial = gkind == "radial";
  rd.get("grid", "dim", s.grid.dim);
  rd.get("grid", "lo", s.grid.lo);
  rd.get("grid", "hi", s.grid.hi);
  rd.get("grid", "rmax", s.grid.rmax);
  rd.get("grid", "h_per_xi", s.grid.h_per_xi);
  Point fixed{0, 0, 0};
  rd.get("grid", "fixed_cells", fixed);
  for (int d = 0; d < 3; ++d) s.grid.fixed_cells[d] = static_cast<int>(fixed[d]);
  if (!s.grid.radial && (s.grid.dim < 1 || s.grid.dim > 3)) rd.errors.push_back("[grid] dim must be 1, 2 or 3");
  if (!(s.grid.h_per_xi > 0)) rd.errors.push_back("[grid] h_per_xi must be positive");

  // [shape]
  std::string skind = "ball";
  rd.get("shape", "kind", skind);
  Point center{0, 0, 0}, normal{1, 0, 0};
  double radius = 1.0, offset = 0.0, lower = -0.5, upper = 0.5;
  rd.get("shape", "center", center);
  rd.get("shape", "radius", radius);
  rd.get("shape", "normal", normal);
  rd.get("shape", "offset", offset);
  rd.get("shape", "lower", lower);
  rd.get("shape", "upper", upper);
  try {
    if (skind == "ball")
      s.shape = InterfaceShape::ball(center, radius);
    else if (skind == "plane")
      s.shape = InterfaceShape::plane(normal, offset);
    else if (skind == "slab")
      s.shape = InterfaceShape::slab(normal, lower, upper);
    else
      rd.errors.push_back(fmt::format("[shape] kind: unknown '{}'", skind));
  } catch (const Error& e) {
    rd.errors.push_back(fmt::format("[shape] {}", e.what()));
  }

  // [schedule]
  if (auto v = rd.raw("schedule", "xi")) s.schedule = rd.numbers("schedule", "xi", *v);
  try {
    validate_schedule(s.schedule);
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) rd.errors.push_back("[schedule] " + v);
  }

  // [sweep]
  std::string seq = to_string(s.sequence), prof = to_string(s.profile);
  rd.get("sweep", "sequence", seq);
  rd.get("sweep", "profile", prof);
  try {
    s.sequence = sequence_kind_from_string(seq);
  } catch (const Error& e) {
    rd.errors.push_back(fmt::format("[sweep] {}", e.what()));
  }
  try {
    s.profile = profile_kind_from_string(prof);
  } catch (const Error& e) {
    rd.errors.push_back(fmt::format("[sweep] {}", e.what()));
  }
  rd.get("sweep", "well_scale", s.well_scale);
  if (!(s.well_scale > 0)) rd.errors.push_back("[sweep] well_scale must be positive");
  rd.get("sweep", "sharp_refine", s.sharp_refine);
  rd.get("sweep", "flow_tol", s.flow_tol);
  rd.get("sweep", "flow_max_steps", s.flow.max_steps);
  rd.get("sweep", "flow_dt0", s.flow.dt0);
  rd.get("sweep", "pb_refresh", s.flow.pb_refresh);
  rd.get("sweep", "cutoff_r1", s.cutoff.r1);
  rd.get("sweep", "cutoff_r2", s.cutoff.r2);
  rd.get("sweep", "cutoff_inner1", s.cutoff.inner1);
  rd.get("sweep", "cutoff_inner2", s.cutoff.inner2);
  rd.get("sweep", "polynomial_fields", s.polynomial_fields);
  if (!(s.cutoff.r2 > s.cutoff.r1)) rd.errors.push_back("[sweep] cutoff_r2 must exceed cutoff_r1");

  // [pb]
  rd.get("pb", "mode", cfg.pb_mode);
  if (cfg.pb_mode != "diffuse" && cfg.pb_mode != "sharp")
    rd.errors.push_back(fmt::format("[pb] mode: unknown '{}'", cfg.pb_mode));
  rd.get("pb", "tol", s.pb.tol);
  rd.get("pb", "max_iters", s.pb.max_iters);
  rd.get("pb", "max_halvings", s.pb.max_halvings);
  rd.get("pb", "c_bound", s.pb.c_bound);
  rd.get("pb", "check_bound", s.pb.check_bound);

  // [tolerances]
  auto& t = s.tol;
  rd.get("tolerances", "volume", t.volume);
  rd.get("tolerances", "surface", t.surface);
  rd.get("tolerances", "vdw", t.vdw);
  rd.get("tolerances", "ele", t.ele);
  rd.get("tolerances", "fit", t.fit);
  rd.get("tolerances", "force", t.force);
  rd.get("tolerances", "equipartition_ratio", t.equipartition_ratio);
  rd.get("tolerances", "plateau", t.plateau);
  rd.get("tolerances", "l1_fraction", t.l1_fraction);
  rd.get("tolerances", "identity", t.identity);
  rd.get("tolerances", "order", t.order);
  rd.get("tolerances", "variation", t.variation);

  errors.insert(errors.end(), rd.errors.begin(), rd.errors.end());

  // modelling assumptions, checked on a coarse grid of the same box
  if (errors.empty()) {
    GridPtr probe;
    try {
      probe = s.grid.radial ? StructuredGrid::radial(s.grid.rmax, 8) : s.grid.build_h(1e9);
    } catch (const Error& e) {
      errors.push_back(fmt::format("[grid] {}", e.what()));
    }
    if (probe) {
      auto v = system_violations(probe, s.params, s.atoms, s.ionic);
      errors.insert(errors.end(), v.begin(), v.end());
      try {
        s.shape.check_domain(*probe);
      } catch (const Error& e) {
        errors.push_back(fmt::format("[geometry] {}", e.what()));
      }
    }
  } else {
    auto v = s.params.violations();
    for (auto& x : v)
      if (std::find(errors.begin(), errors.end(), x) == errors.end()) errors.push_back(x);
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({fmt::format("cannot read config file '{}'", path.string())});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace solvate
