#pragma once

// One-dimensional interface profiles s -> g(s) (s = signed distance, positive
// inside G) and their lifts phi(x) = g(d(x)).

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "solvate/grid.hpp"
#include "solvate/shape.hpp"

namespace solvate {

/// Upper bound xi_0 on admissible interface widths.
inline constexpr double kXiMax = 0.5;

enum class ProfileKind { canonical, gk, recovery };

struct ProfileSpec {
  double xi = 0.1;
  double well_scale = 1.0;  // a in W_a = W / a
  ProfileKind kind = ProfileKind::canonical;
};

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

class Profile {
 public:
  /// Logistic solution of xi g' = 6 g (1 - g), g(0) = 1/2.
  static Profile canonical(double xi);
  /// Inverse of q(t) = int_0^t xi / sqrt(2 (W(tau)/a + xi)) dtau on [0, lambda].
  static Profile gk(double xi, double a);
  /// Clamped canonical profile filling the collar [0, sqrt(xi)].
  static Profile recovery(double xi);

  const ProfileSpec& spec() const { return spec_; }
  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;

  /// Transition interval; outside it g is 0 (below) or 1 (above).
  /// The canonical profile has no bounded support and reports +-infinity.
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  /// lambda = q(1) for the gk kind, sqrt(xi) for recovery, 0 for canonical.
  double width() const;

  /// The forward map q (gk kind only).
  double q(double t) const;

  /// (s, g(s)) on `n` nodes spanning the transition.
  std::vector<std::pair<double, double>> tabulate(int n = 4096) const;
  std::string csv(int n = 4096) const;

 private:
  struct GkTable;
  ProfileSpec spec_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double offset_ = 0.0;   // recovery: collar centre c
  double clamp_m_ = 0.0;  // recovery: L(-c)
  std::shared_ptr<const GkTable> table_;
};

/// (1 + a) / (2 sqrt(a)); throws DomainError for a <= 0.
double beta_limit(double a);

/// phi(x) = g(d(x)) with the exact chain-rule gradient and Laplacian attached.
ScalarField lift_profile(const Profile& profile, const InterfaceShape& shape, const GridPtr& grid);

/// Recovery field: 0 outside G, 1 deeper than sqrt(xi), clamped canonical
/// profile in between. Throws ShapeError when a ball is thinner than sqrt(xi).
ScalarField recovery_phase_field(const InterfaceShape& shape, double xi, const GridPtr& grid);

/// Discrete L1 distance to the indicator of G.
double l1_distance_to_indicator(const ScalarField& phi, const InterfaceShape& shape);

}  // namespace solvate
