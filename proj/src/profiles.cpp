#include "solvate/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <fmt/format.h>

#include "solvate/errors.hpp"
#include "solvate/quadrature.hpp"

namespace solvate {

namespace {

constexpr int kTableNodes = 4096;

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_xi(double xi) {
  if (!(xi > 0.0) || xi > kXiMax)
    throw DomainError(fmt::format("interface width xi = {} outside (0, {}]", xi, kXiMax));
}

}  // namespace

struct Profile::GkTable {
  double xi = 0.0;
  double a = 1.0;
  std::vector<double> t;
  std::vector<double> q;
  boost::math::interpolators::cubic_hermite<std::vector<double>> inverse;

  GkTable(double xi_, double a_, std::vector<double> t_, std::vector<double> q_,
          boost::math::interpolators::cubic_hermite<std::vector<double>> inv)
      : xi(xi_), a(a_), t(std::move(t_)), q(std::move(q_)), inverse(std::move(inv)) {}

  double integrand(double tau) const { return xi / std::sqrt(2.0 * (eval_W(tau) / a + xi)); }

  double cell_integral(double from, double to) const {
    double s = 0.0;
    for (const auto& n : gauss_legendre(from, to, 1)) s += n.w * integrand(n.x);
    return s;
  }

  double forward(double tt) const {
    tt = std::clamp(tt, 0.0, 1.0);
    const int k = std::min(static_cast<int>(tt * (kTableNodes - 1)), kTableNodes - 2);
    return q[k] + cell_integral(t[k], tt);
  }

  double invert(double s) const {
    const auto it = std::upper_bound(q.begin(), q.end(), s);
    const int k = std::clamp(static_cast<int>(it - q.begin()) - 1, 0, kTableNodes - 2);
    double tt = std::clamp(inverse(std::clamp(s, q.front(), q.back())), t[k], t[k + 1]);
    for (int iter = 0; iter < 4; ++iter) {
      const double r = q[k] + cell_integral(t[k], tt) - s;
      tt = std::clamp(tt - r / integrand(tt), t[k], t[k + 1]);
    }
    return tt;
  }
};

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::gk:
      return "gk";
    case ProfileKind::recovery:
      return "recovery";
    case ProfileKind::canonical:
    default:
      return "canonical";
  }
}

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "canonical") return ProfileKind::canonical;
  if (name == "gk") return ProfileKind::gk;
  if (name == "recovery") return ProfileKind::recovery;
  throw DomainError(fmt::format("unknown profile kind '{}'", name));
}

Profile Profile::canonical(double xi) {
  check_xi(xi);
  Profile p;
  p.spec_ = {xi, 1.0, ProfileKind::canonical};
  p.lo_ = -std::numeric_limits<double>::infinity();
  p.hi_ = std::numeric_limits<double>::infinity();
  return p;
}

Profile Profile::recovery(double xi) {
  check_xi(xi);
  Profile p;
  p.spec_ = {xi, 1.0, ProfileKind::recovery};
  p.lo_ = 0.0;
  p.hi_ = std::sqrt(xi);
  p.offset_ = 0.5 * p.hi_;
  p.clamp_m_ = logistic(-6.0 * p.offset_ / xi);
  return p;
}

Profile Profile::gk(double xi, double a) {
  check_xi(xi);
  if (!(a > 0.0)) throw DomainError(fmt::format("well scale a = {} must be positive", a));
  std::vector<double> t(kTableNodes), q(kTableNodes), dtds(kTableNodes);
  auto f = [&](double tau) { return xi / std::sqrt(2.0 * (eval_W(tau) / a + xi)); };
  for (int k = 0; k < kTableNodes; ++k) t[k] = static_cast<double>(k) / (kTableNodes - 1);
  t.back() = 1.0;
  q[0] = 0.0;
  for (int k = 1; k < kTableNodes; ++k) {
    double s = 0.0;
    for (const auto& n : gauss_legendre(t[k - 1], t[k], 1)) s += n.w * f(n.x);
    q[k] = q[k - 1] + s;
    if (!(q[k] > q[k - 1])) throw Error("gk profile tabulation is not strictly increasing");
  }
  for (int k = 0; k < kTableNodes; ++k) dtds[k] = 1.0 / f(t[k]);
  auto tc = t, qc = q;
  boost::math::interpolators::cubic_hermite<std::vector<double>> inv(std::move(qc), std::move(tc),
                                                                     std::move(dtds));
  Profile p;
  p.spec_ = {xi, a, ProfileKind::gk};
  p.lo_ = 0.0;
  p.hi_ = q.back();
  p.table_ = std::make_shared<const GkTable>(xi, a, std::move(t), std::move(q), std::move(inv));
  return p;
}

double Profile::width() const {
  if (spec_.kind == ProfileKind::canonical) return 0.0;
  return hi_ - lo_;
}

double Profile::q(double t) const {
  if (spec_.kind != ProfileKind::gk) throw DomainError("q is defined for gk profiles only");
  return table_->forward(t);
}

double Profile::value(double s) const {
  const double xi = spec_.xi;
  switch (spec_.kind) {
    case ProfileKind::canonical:
      return logistic(6.0 * s / xi);
    case ProfileKind::recovery:
      if (s <= lo_) return 0.0;
      if (s >= hi_) return 1.0;
      return std::clamp((logistic(6.0 * (s - offset_) / xi) - clamp_m_) / (1.0 - 2.0 * clamp_m_), 0.0, 1.0);
    case ProfileKind::gk:
    default:
      if (s <= lo_) return 0.0;
      if (s >= hi_) return 1.0;
      return table_->invert(s);
  }
}

double Profile::d1(double s) const {
  const double xi = spec_.xi;
  switch (spec_.kind) {
    case ProfileKind::canonical: {
      const double g = logistic(6.0 * s / xi);
      return 6.0 * g * (1.0 - g) / xi;
    }
    case ProfileKind::recovery: {
      if (s <= lo_ || s >= hi_) return 0.0;
      const double l = logistic(6.0 * (s - offset_) / xi);
      return 6.0 * l * (1.0 - l) / xi / (1.0 - 2.0 * clamp_m_);
    }
    case ProfileKind::gk:
    default: {
      if (s <= lo_ || s >= hi_) return 0.0;
      const double g = table_->invert(s);
      return std::sqrt(2.0 * (eval_W(g) / spec_.well_scale + xi)) / xi;
    }
  }
}

double Profile::d2(double s) const {
  const double xi = spec_.xi;
  switch (spec_.kind) {
    case ProfileKind::canonical: {
      const double g = logistic(6.0 * s / xi);
      return 36.0 / (xi * xi) * g * (1.0 - g) * (1.0 - 2.0 * g);
    }
    case ProfileKind::recovery: {
      if (s <= lo_ || s >= hi_) return 0.0;
      const double l = logistic(6.0 * (s - offset_) / xi);
      return 36.0 / (xi * xi) * l * (1.0 - l) * (1.0 - 2.0 * l) / (1.0 - 2.0 * clamp_m_);
    }
    case ProfileKind::gk:
    default: {
      if (s <= lo_ || s >= hi_) return 0.0;
      const double g = table_->invert(s);
      return eval_W_prime(g) / spec_.well_scale / (xi * xi);
    }
  }
}

std::vector<std::pair<double, double>> Profile::tabulate(int n) const {
  double a = lo_, b = hi_;
  if (spec_.kind == ProfileKind::canonical) {
    a = -3.0 * spec_.xi;
    b = 3.0 * spec_.xi;
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double s = a + (b - a) * k / (n - 1);
    out.emplace_back(s, value(s));
  }
  return out;
}

std::string Profile::csv(int n) const {
  std::string out = "s,g\n";
  for (const auto& [s, g] : tabulate(n)) out += fmt::format("{:.17g},{:.17g}\n", s, g);
  return out;
}

double beta_limit(double a) {
  if (!(a > 0.0)) throw DomainError(fmt::format("beta(a) needs a > 0, got {}", a));
  return (1.0 + a) / (2.0 * std::sqrt(a));
}

ScalarField lift_profile(const Profile& profile, const InterfaceShape& shape, const GridPtr& grid) {
  shape.check_domain(*grid);
  const std::size_t n = grid->node_count();
  const int nc = grid->vector_components();
  const int dim = grid->is_radial() ? 3 : grid->dim();
  std::vector<double> phi(n), grad(n * nc, 0.0), lap(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = grid->coord(i);
    const double d = shape.signed_distance(x);
    phi[i] = profile.value(d);
    const double g1 = profile.d1(d);
    if (g1 == 0.0) {
      lap[i] = profile.d2(d);
      continue;
    }
    const Point gd = shape.distance_gradient(x);
    const double gd2 = gd[0] * gd[0] + gd[1] * gd[1] + gd[2] * gd[2];
    if (grid->is_radial()) {
      grad[i] = g1 * gd[0];  // x = (r, 0, 0), so the radial component is the first
    } else {
      for (int c = 0; c < nc; ++c) grad[i * nc + c] = g1 * gd[c];
    }
    lap[i] = profile.d2(d) * gd2 + g1 * shape.distance_laplacian(x, dim);
  }
  ScalarField out(grid, std::move(phi));
  out.attach_exact(std::move(grad), std::move(lap));
  out.set_under_resolved(grid->max_h() > profile.spec().xi / 4.0);
  return out;
}

ScalarField recovery_phase_field(const InterfaceShape& shape, double xi, const GridPtr& grid) {
  check_xi(xi);
  if (shape.kind() == ShapeKind::ball && shape.radius() < std::sqrt(xi))
    throw ShapeError(fmt::format("shape too small: ball radius {} < sqrt(xi) = {}", shape.radius(), std::sqrt(xi)));
  if (shape.kind() == ShapeKind::slab && shape.upper() - shape.offset() < 2.0 * std::sqrt(xi))
    throw ShapeError("shape too small: slab thinner than 2 sqrt(xi)");
  return lift_profile(Profile::recovery(xi), shape, grid);
}

double l1_distance_to_indicator(const ScalarField& phi, const InterfaceShape& shape) {
  const auto& g = phi.grid();
  std::vector<double> diff(phi.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = std::abs(phi[i] - (shape.contains(g->coord(i)) ? 1.0 : 0.0));
  return integrate(g, diff);
}

}  // namespace solvate
