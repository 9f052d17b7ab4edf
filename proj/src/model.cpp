#include "solvate/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "solvate/errors.hpp"

namespace solvate {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "validation failed:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<std::string> SolvationParams::violations() const {
  std::vector<std::string> out;
  if (!(pressure > 0)) out.push_back(fmt::format("[model] pressure P0 = {} must be positive", pressure));
  if (!(surface_tension > 0))
    out.push_back(fmt::format("[model] surface tension gamma0 = {} must be positive", surface_tension));
  if (!(solvent_density > 0))
    out.push_back(fmt::format("[model] solvent density rho0 = {} must be positive", solvent_density));
  if (!(eps_p > 0) || !(eps_w > 0) || eps_p == eps_w)
    out.push_back(fmt::format("[dielectric] permittivities eps_p = {}, eps_w = {} must be positive and distinct",
                              eps_p, eps_w));
  if (!(kBT > 0)) out.push_back(fmt::format("thermal energy kBT = {} must be positive", kBT));
  return out;
}

void SolvationParams::validate() const {
  auto v = violations();
  if (!v.empty()) throw ValidationError(std::move(v));
}

IonicModel::IonicModel(std::vector<IonSpecies> species) : species_(std::move(species)) { validate(); }

IonicModel IonicModel::symmetric_salt(double conc, double valence) {
  return IonicModel({{conc, valence}, {conc, -valence}});
}

std::vector<std::string> IonicModel::violations() const {
  std::vector<std::string> out;
  if (species_.empty()) out.push_back("[ions] ionic model needs at least one species");
  double net = 0.0;
  double scale = 0.0;
  for (const auto& s : species_) {
    if (!(s.bulk_conc > 0))
      out.push_back(fmt::format("[ions] bulk concentration {} must be positive", s.bulk_conc));
    net += s.charge * s.bulk_conc;
    scale += std::abs(s.charge * s.bulk_conc);
  }
  if (std::abs(net) > 1e-12 * std::max(scale, 1.0))
    out.push_back(fmt::format("[ions] species are not charge neutral: sum q_j c_j = {}", net));
  return out;
}

void IonicModel::validate() const {
  auto v = violations();
  if (!v.empty()) throw ValidationError(std::move(v));
}

double eval_W(double phi) {
  const double t = phi * (1.0 - phi);
  return 18.0 * t * t;
}

double eval_W_prime(double phi) { return 36.0 * phi * (1.0 - phi) * (1.0 - 2.0 * phi); }

double eval_W_second(double phi) { return 36.0 * (1.0 - 6.0 * phi + 6.0 * phi * phi); }

double eval_eta(double phi) { return phi * phi * (3.0 - 2.0 * phi); }

double eval_sqrt_2W(double phi) { return 6.0 * std::abs(phi * (1.0 - phi)); }

double eval_B(double s, const IonicModel& ionic, double kBT) {
  double sum = 0.0;
  for (const auto& sp : ionic.species()) sum += sp.bulk_conc * std::expm1(-sp.charge * s / kBT);
  return kBT * sum;
}

double eval_B_prime(double s, const IonicModel& ionic, double kBT) {
  double sum = 0.0;
  for (const auto& sp : ionic.species()) sum -= sp.bulk_conc * sp.charge * std::exp(-sp.charge * s / kBT);
  return sum;
}

double eval_B_second(double s, const IonicModel& ionic, double kBT) {
  double sum = 0.0;
  for (const auto& sp : ionic.species())
    sum += sp.bulk_conc * sp.charge * sp.charge * std::exp(-sp.charge * s / kBT);
  return sum / kBT;
}

namespace {

double smoothstep(double t, DielectricKind kind) {
  t = std::clamp(t, 0.0, 1.0);
  switch (kind) {
    case DielectricKind::cubic:
      return t * t * (3.0 - 2.0 * t);
    case DielectricKind::quintic:
    default:
      return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
}

double smoothstep_prime(double t, DielectricKind kind) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  switch (kind) {
    case DielectricKind::cubic:
      return 6.0 * t * (1.0 - t);
    case DielectricKind::quintic:
    default:
      return 30.0 * t * t * (1.0 - t) * (1.0 - t);
  }
}

}  // namespace

double eval_eps(double phi, const DielectricProfile& d) {
  return d.eps_w + (d.eps_p - d.eps_w) * smoothstep(phi, d.kind);
}

double eval_eps_prime(double phi, const DielectricProfile& d) {
  return (d.eps_p - d.eps_w) * smoothstep_prime(phi, d.kind);
}

double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double eval_U(const Point& x, std::span<const SoluteAtom> atoms) {
  double u = 0.0;
  for (const auto& a : atoms) {
    const double r = distance(x, a.position);
    if (r == 0.0) return kInfinity;
    const double s2 = (a.lj_length / r) * (a.lj_length / r);
    const double s6 = s2 * s2 * s2;
    u += 4.0 * a.lj_energy * (s6 * s6 - s6);
  }
  return u;
}

double eval_U_capped(const Point& x, std::span<const SoluteAtom> atoms, double cap) {
  return std::min(eval_U(x, atoms), cap);
}

Point eval_U_gradient(const Point& x, std::span<const SoluteAtom> atoms) {
  Point g{0.0, 0.0, 0.0};
  for (const auto& a : atoms) {
    const double r = distance(x, a.position);
    if (r == 0.0) throw SingularityError("Lennard-Jones gradient requested at an atom center");
    const double s2 = (a.lj_length / r) * (a.lj_length / r);
    const double s6 = s2 * s2 * s2;
    // dU/dr = 4 eps (-12 s^12 + 6 s^6) / r
    const double dudr = 4.0 * a.lj_energy * (-12.0 * s6 * s6 + 6.0 * s6) / r;
    for (int k = 0; k < 3; ++k) g[k] += dudr * (x[k] - a.position[k]) / r;
  }
  return g;
}

double smeared_charge_density(const Point& x, std::span<const SoluteAtom> atoms, int dim) {
  double rho = 0.0;
  for (const auto& a : atoms) {
    if (a.charge == 0.0) continue;
    const double r = distance(x, a.position);
    const double two_a2 = 2.0 * a.smear_width * a.smear_width;
    const double norm = std::pow(std::numbers::pi * two_a2, -0.5 * dim);
    rho += a.charge * norm * std::exp(-r * r / two_a2);
  }
  return rho;
}

}  // namespace solvate
