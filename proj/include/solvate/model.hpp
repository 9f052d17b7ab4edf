#pragma once

// Physical parameters and pointwise constitutive functions of the solvation
// model: double well, ionic response, dielectric interpolation, Lennard-Jones
// interaction and smeared solute charge density. Units are dimensionless
// (kBT = 1, unit length of order one atomic diameter).

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace solvate {

using Point = std::array<double, 3>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SolvationParams {
  double pressure = 0.1;         // P0, energy / volume
  double surface_tension = 1.0;  // gamma0, energy / area
  double solvent_density = 1.0;  // rho0, 1 / volume
  double eps_p = 1.0;
  double eps_w = 80.0;
  double kBT = 1.0;

  std::vector<std::string> violations() const;
  void validate() const;
};

struct IonSpecies {
  double bulk_conc = 0.0;
  double charge = 0.0;
};

class IonicModel {
 public:
  IonicModel() = default;
  explicit IonicModel(std::vector<IonSpecies> species);

  /// z:z salt with both species at concentration c.
  static IonicModel symmetric_salt(double conc, double valence = 1.0);

  std::span<const IonSpecies> species() const { return species_; }
  bool empty() const { return species_.empty(); }

  std::vector<std::string> violations() const;
  void validate() const;

 private:
  std::vector<IonSpecies> species_;
};

struct SoluteAtom {
  Point position{0.0, 0.0, 0.0};
  double charge = 0.0;      // Q_i
  double lj_energy = 0.0;   // epsilon_i
  double lj_length = 1.0;   // sigma_i
  double smear_width = 0.5; // a_i
};

enum class DielectricKind { quintic, cubic };

struct DielectricProfile {
  double eps_p = 1.0;
  double eps_w = 80.0;
  DielectricKind kind = DielectricKind::quintic;
};

// Double well W(phi) = 18 phi^2 (1 - phi)^2.
double eval_W(double phi);
double eval_W_prime(double phi);
double eval_W_second(double phi);

// Closed-form antiderivative of sqrt(2 W) from 0, extended by the sign of
// 6 t (1 - t) outside [0, 1]: eta(phi) = 3 phi^2 - 2 phi^3 on all of R
// gives d eta / d phi = 6 phi (1 - phi), which equals sqrt(2W) on [0,1].
double eval_eta(double phi);
double eval_sqrt_2W(double phi);

// Ionic free-energy density B(s) = kBT sum_j c_j (exp(-q_j s / kBT) - 1).
double eval_B(double s, const IonicModel& ionic, double kBT);
double eval_B_prime(double s, const IonicModel& ionic, double kBT);
double eval_B_second(double s, const IonicModel& ionic, double kBT);

double eval_eps(double phi, const DielectricProfile& d);
double eval_eps_prime(double phi, const DielectricProfile& d);

/// Lennard-Jones potential summed over atoms; +inf exactly at a center.
double eval_U(const Point& x, std::span<const SoluteAtom> atoms);
/// min(U, cap), the form used for sampling U on grids.
double eval_U_capped(const Point& x, std::span<const SoluteAtom> atoms, double cap);
/// Analytic gradient; throws SingularityError at an atom center.
Point eval_U_gradient(const Point& x, std::span<const SoluteAtom> atoms);

/// Sum of normalized Gaussians in `dim` dimensions.
double smeared_charge_density(const Point& x, std::span<const SoluteAtom> atoms, int dim = 3);

double distance(const Point& a, const Point& b);

}  // namespace solvate
