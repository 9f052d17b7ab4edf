#include "solvate/forces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "solvate/errors.hpp"
#include "solvate/quadrature.hpp"

namespace solvate {

namespace {

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep5_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

int geometric_dim(const StructuredGrid& g) { return g.is_radial() ? 3 : g.dim(); }

// gradient of phi: exact attachment or finite differences
VectorField phi_gradient(const ScalarField& phi) {
  if (!phi.has_exact()) return gradient(phi);
  VectorField g(phi.grid());
  g.data() = phi.exact_gradient();
  return g;
}

ScalarField phi_laplacian(const ScalarField& phi) {
  if (!phi.has_exact()) return laplacian(phi);
  return ScalarField(phi.grid(), phi.exact_laplacian());
}

// grad U at nodes; zero where the cap is active.
VectorField lj_gradient(const PhaseFieldSystem& sys) {
  VectorField out(sys.grid);
  if (sys.atoms.empty()) return out;
  const int nc = out.components();
  for (std::size_t i = 0; i < sys.grid->node_count(); ++i) {
    if (sys.U[i] >= sys.u_cap) continue;
    const auto g = eval_U_gradient(sys.grid->coord(i), sys.atoms);
    for (int c = 0; c < nc; ++c) out.at(i, c) = g[c];
  }
  return out;
}

// T = alpha I + beta g (x) g at node i.
void set_tensor(TensorField& t, std::size_t i, double alpha, const VectorField& g, double beta) {
  const auto& grid = *t.grid();
  if (grid.is_radial()) {
    const double gr = g.at(i, 0);
    t.at(i, 0) = alpha + beta * gr * gr;
    t.at(i, 1) = alpha;
    return;
  }
  const int n = grid.dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t.at(i, a * n + b) = (a == b ? alpha : 0.0) + beta * g.at(i, a) * g.at(i, b);
}

double norm_sq(const VectorField& v, std::size_t i) {
  double s = 0.0;
  for (int c = 0; c < v.components(); ++c) s += v.at(i, c) * v.at(i, c);
  return s;
}

double B_or_zero(double s, const PhaseFieldSystem& sys) {
  return sys.ionic.empty() ? 0.0 : eval_B(s, sys.ionic, sys.params.kBT);
}

void check_psi(const PhaseFieldSystem& sys, const ScalarField& phi, const ScalarField& psi) {
  require_same_grid(sys.grid, phi.grid());
  require_same_grid(sys.grid, psi.grid());
}

}  // namespace

// ---- test fields ------------------------------------------------------------

double Cutoff::value(const Point& x) const {
  const double r = distance(x, center);
  double v = 1.0 - smoothstep5((r - r1) / (r2 - r1));
  if (inner2 > 0.0) v *= smoothstep5((r - inner1) / (inner2 - inner1));
  return v;
}

Point Cutoff::gradient(const Point& x) const {
  const double r = distance(x, center);
  if (r == 0.0) return {0, 0, 0};
  const double outer = 1.0 - smoothstep5((r - r1) / (r2 - r1));
  const double douter = -smoothstep5_prime((r - r1) / (r2 - r1)) / (r2 - r1);
  double inner = 1.0, dinner = 0.0;
  if (inner2 > 0.0) {
    inner = smoothstep5((r - inner1) / (inner2 - inner1));
    dinner = smoothstep5_prime((r - inner1) / (inner2 - inner1)) / (inner2 - inner1);
  }
  const double dr = douter * inner + outer * dinner;
  return {dr * (x[0] - center[0]) / r, dr * (x[1] - center[1]) / r, dr * (x[2] - center[2]) / r};
}

bool Cutoff::vanishes_near(const Point& x) const {
  const double r = distance(x, center);
  if (r > r2) return true;
  return inner2 > 0.0 && r < inner1;
}

TestField TestField::constant(const Point& direction, const Cutoff& cutoff) {
  TestField f;
  Term t;
  t.kind = TestFieldKind::constant;
  t.direction = direction;
  t.cutoff = cutoff;
  f.terms_.push_back(t);
  f.id_ = "constant";
  return f;
}

TestField TestField::radial(const Cutoff& cutoff) {
  TestField f;
  Term t;
  t.kind = TestFieldKind::radial;
  t.cutoff = cutoff;
  f.terms_.push_back(t);
  f.id_ = "radial";
  return f;
}

TestField TestField::rotational(const Cutoff& cutoff) {
  TestField f;
  Term t;
  t.kind = TestFieldKind::rotational;
  t.cutoff = cutoff;
  f.terms_.push_back(t);
  f.id_ = "rotational";
  return f;
}

TestField TestField::polynomial(std::uint64_t seed, int dim, const Cutoff& cutoff) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TestField f;
  Term t;
  t.kind = TestFieldKind::polynomial;
  t.cutoff = cutoff;
  for (int i = 0; i < 3; ++i) {
    t.a[i] = i < dim ? u(rng) : 0.0;
    for (int j = 0; j < 3; ++j) {
      t.b[i * 3 + j] = (i < dim && j < dim) ? u(rng) : 0.0;
      for (int k = 0; k < 3; ++k) t.c[(i * 3 + j) * 3 + k] = (i < dim && j < dim && k < dim) ? u(rng) : 0.0;
    }
  }
  f.terms_.push_back(t);
  f.id_ = fmt::format("polynomial-{}", seed);
  return f;
}

TestField TestField::zero() {
  TestField f;
  f.id_ = "zero";
  return f;
}

TestField TestField::scaled(double a) const {
  TestField f = *this;
  for (auto& t : f.terms_) t.coef *= a;
  f.id_ = fmt::format("{}*{}", a, id_);
  return f;
}

TestField TestField::plus(const TestField& other) const {
  TestField f = *this;
  f.terms_.insert(f.terms_.end(), other.terms_.begin(), other.terms_.end());
  f.id_ = id_ + "+" + other.id_;
  return f;
}

Point TestField::value(const Point& x) const {
  Point v{0, 0, 0};
  for (const auto& t : terms_) {
    const double c = t.cutoff.value(x);
    if (c == 0.0) continue;
    const Point y{x[0] - t.cutoff.center[0], x[1] - t.cutoff.center[1], x[2] - t.cutoff.center[2]};
    Point p{0, 0, 0};
    switch (t.kind) {
      case TestFieldKind::constant:
        p = t.direction;
        break;
      case TestFieldKind::radial:
        p = y;
        break;
      case TestFieldKind::rotational:
        p = {-y[1], y[0], 0.0};
        break;
      case TestFieldKind::polynomial:
        for (int i = 0; i < 3; ++i) {
          double s = t.a[i];
          for (int j = 0; j < 3; ++j) {
            s += t.b[i * 3 + j] * y[j];
            for (int k = 0; k < 3; ++k) s += t.c[(i * 3 + j) * 3 + k] * y[j] * y[k];
          }
          p[i] = s;
        }
        break;
    }
    for (int i = 0; i < 3; ++i) v[i] += t.coef * c * p[i];
  }
  return v;
}

std::array<double, 9> TestField::jacobian(const Point& x) const {
  std::array<double, 9> J{};
  for (const auto& t : terms_) {
    const double c = t.cutoff.value(x);
    const Point dc = t.cutoff.gradient(x);
    if (c == 0.0 && dc[0] == 0.0 && dc[1] == 0.0 && dc[2] == 0.0) continue;
    const Point y{x[0] - t.cutoff.center[0], x[1] - t.cutoff.center[1], x[2] - t.cutoff.center[2]};
    Point p{0, 0, 0};
    std::array<double, 9> Dp{};
    switch (t.kind) {
      case TestFieldKind::constant:
        p = t.direction;
        break;
      case TestFieldKind::radial:
        p = y;
        Dp[0] = Dp[4] = Dp[8] = 1.0;
        break;
      case TestFieldKind::rotational:
        p = {-y[1], y[0], 0.0};
        Dp[1] = -1.0;
        Dp[3] = 1.0;
        break;
      case TestFieldKind::polynomial:
        for (int i = 0; i < 3; ++i) {
          double s = t.a[i];
          for (int j = 0; j < 3; ++j) {
            s += t.b[i * 3 + j] * y[j];
            double d = t.b[i * 3 + j];
            for (int k = 0; k < 3; ++k) {
              s += t.c[(i * 3 + j) * 3 + k] * y[j] * y[k];
              d += (t.c[(i * 3 + j) * 3 + k] + t.c[(i * 3 + k) * 3 + j]) * y[k];
            }
            Dp[i * 3 + j] = d;
          }
          p[i] = s;
        }
        break;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) J[i * 3 + j] += t.coef * (Dp[i * 3 + j] * c + p[i] * dc[j]);
  }
  return J;
}

bool TestField::vanishes_near(const Point& x) const {
  return std::all_of(terms_.begin(), terms_.end(), [&](const Term& t) { return t.cutoff.vanishes_near(x); });
}

VectorField TestField::sample(const GridPtr& grid) const {
  VectorField out(grid);
  const int nc = out.components();
  for (std::size_t i = 0; i < grid->node_count(); ++i) {
    const auto v = value(grid->coord(i));
    for (int c = 0; c < nc; ++c) out.at(i, c) = v[c];
  }
  return out;
}

TensorField TestField::sample_gradient(const GridPtr& grid) const {
  TensorField out(grid);
  for (std::size_t i = 0; i < grid->node_count(); ++i) {
    const auto J = jacobian(grid->coord(i));
    if (grid->is_radial()) {
      out.at(i, 0) = J[0];
      out.at(i, 1) = J[4];
      continue;
    }
    const int n = grid->dim();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) out.at(i, a * n + b) = J[a * 3 + b];
  }
  return out;
}

// ---- phase-field forces ----------------------------------------------------------

ScalarField variation_delta_F(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const PBSolution& pb) {
  if (pb.mode != PBMode::diffuse || pb.phi_hash != field_hash(phi.data()))
    throw ConsistencyError("PB solution was computed for a different phase field");
  return variation_delta_F(sys, phi, xi, pb.psi);
}

ScalarField variation_delta_F(const PhaseFieldSystem& sys, const ScalarField& phi, double xi,
                              const ScalarField& psi) {
  check_psi(sys, phi, psi);
  const auto& p = sys.params;
  const ScalarField lap = phi.has_exact() ? ScalarField(phi.grid(), phi.exact_laplacian()) : variational_laplacian(phi);
  const auto g2 = edge_gradient_sq(psi);
  ScalarField out(phi.grid());
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = phi[i];
    v[i] = 2.0 * p.pressure * f + p.surface_tension * (-xi * lap[i] + eval_W_prime(f) / xi) +
           2.0 * p.solvent_density * (f - 1.0) * sys.U[i] - 0.5 * eval_eps_prime(f, sys.dielectric) * g2[i] -
           2.0 * (f - 1.0) * B_or_zero(psi[i], sys);
  }
  return out;
}

VectorField ForceSet::total() const {
  VectorField t(vol.grid());
  auto& d = t.data();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = vol.data()[k] + sur.data()[k] + vdw.data()[k] + ele.data()[k];
  return t;
}

ForceSet force_densities(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const ScalarField& psi) {
  check_psi(sys, phi, psi);
  const auto& p = sys.params;
  const auto gphi = phi_gradient(phi);
  const auto lap = phi_laplacian(phi);
  const auto gpsi = gradient(psi);
  ForceSet f{VectorField(sys.grid), VectorField(sys.grid), VectorField(sys.grid), VectorField(sys.grid)};
  const int nc = gphi.components();
  for (std::size_t i = 0; i < sys.grid->node_count(); ++i) {
    const double ph = phi[i];
    const double svol = 2.0 * p.pressure * ph;
    const double ssur = p.surface_tension * (-xi * lap[i] + eval_W_prime(ph) / xi);
    const double svdw = 2.0 * p.solvent_density * (ph - 1.0) * sys.U[i];
    const double sele =
        -0.5 * eval_eps_prime(ph, sys.dielectric) * norm_sq(gpsi, i) - 2.0 * (ph - 1.0) * B_or_zero(psi[i], sys);
    for (int c = 0; c < nc; ++c) {
      const double g = gphi.at(i, c);
      f.vol.at(i, c) = svol * g;
      f.sur.at(i, c) = ssur * g;
      f.vdw.at(i, c) = svdw * g;
      f.ele.at(i, c) = sele * g;
    }
  }
  return f;
}

TensorField ch_tensor(const ScalarField& phi, double xi) {
  const auto gphi = phi_gradient(phi);
  TensorField t(phi.grid());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double e = 0.5 * xi * norm_sq(gphi, i) + eval_W(phi[i]) / xi;
    set_tensor(t, i, e, gphi, -xi);
  }
  return t;
}

StressSet stress_set(const PhaseFieldSystem& sys, const ScalarField& phi, double xi, const ScalarField& psi) {
  check_psi(sys, phi, psi);
  const auto& p = sys.params;
  const auto gphi = phi_gradient(phi);
  const auto gpsi = gradient(psi);
  StressSet s{TensorField(sys.grid), TensorField(sys.grid), TensorField(sys.grid), TensorField(sys.grid), xi,
              field_hash(phi.data()), field_hash(psi.data())};
  for (std::size_t i = 0; i < sys.grid->node_count(); ++i) {
    const double ph = phi[i];
    const double m = ph - 1.0;
    set_tensor(s.vol, i, p.pressure * ph * ph, gphi, 0.0);
    set_tensor(s.sur, i, p.surface_tension * (0.5 * xi * norm_sq(gphi, i) + eval_W(ph) / xi), gphi,
               -p.surface_tension * xi);
    set_tensor(s.vdw, i, p.solvent_density * m * m * sys.U[i], gphi, 0.0);
    const double eps = eval_eps(ph, sys.dielectric);
    set_tensor(s.ele, i, -(0.5 * eps * norm_sq(gpsi, i) + m * m * B_or_zero(psi[i], sys)), gpsi, eps);
  }
  return s;
}

DivergenceResidual divergence_residual(const PhaseFieldSystem& sys, const StressSet& stress, const ForceSet& forces,
                                       const ScalarField& phi, const ScalarField& psi, int margin) {
  check_psi(sys, phi, psi);
  const auto dvol = tensor_divergence(stress.vol);
  const auto dsur = tensor_divergence(stress.sur);
  const auto dvdw = tensor_divergence(stress.vdw);
  const auto dele = tensor_divergence(stress.ele);
  const auto gU = lj_gradient(sys);
  const auto gpsi = gradient(psi);
  const auto& w = sys.grid->weights();
  DivergenceResidual r;
  std::array<double, 4> l2{};
  const int nc = dvol.components();
  for (std::size_t i = 0; i < sys.grid->node_count(); ++i) {
    if (sys.grid->boundary_distance(i) < margin) continue;
    const double m = phi[i] - 1.0;
    std::array<double, 4> sq{};
    for (int c = 0; c < nc; ++c) {
      const double rv = dvol.at(i, c) - forces.vol.at(i, c);
      const double rs = dsur.at(i, c) - forces.sur.at(i, c);
      const double rw = dvdw.at(i, c) - sys.params.solvent_density * m * m * gU.at(i, c) - forces.vdw.at(i, c);
      const double re = dele.at(i, c) + sys.rho[i] * gpsi.at(i, c) - forces.ele.at(i, c);
      sq[0] += rv * rv;
      sq[1] += rs * rs;
      sq[2] += rw * rw;
      sq[3] += re * re;
    }
    for (int k = 0; k < 4; ++k) {
      r.sup[k] = std::max(r.sup[k], std::sqrt(sq[k]));
      l2[k] += w[i] * sq[k];
    }
  }
  for (int k = 0; k < 4; ++k) r.l2[k] = std::sqrt(l2[k]);
  return r;
}

std::string to_string(StressTerm t) {
  switch (t) {
    case StressTerm::vol:
      return "vol";
    case StressTerm::sur:
      return "sur";
    case StressTerm::vdw:
      return "vdw";
    case StressTerm::ele:
    default:
      return "ele";
  }
}

double weak_pairing(const TensorField& t, const TestField& v) {
  return -integrate(t.grid(), contract(t, v.sample_gradient(t.grid())));
}

double weak_pairing(const PhaseFieldSystem& sys, const StressSet& stress, StressTerm term, const TestField& v,
                    const ScalarField& phi, const ScalarField& psi) {
  check_psi(sys, phi, psi);
  const auto& grid = sys.grid;
  switch (term) {
    case StressTerm::vol:
      return weak_pairing(stress.vol, v);
    case StressTerm::sur:
      return weak_pairing(stress.sur, v);
    case StressTerm::vdw: {
      for (std::size_t k = 0; k < sys.atoms.size(); ++k)
        if (!v.vanishes_near(sys.atoms[k].position))
          throw SupportViolation(fmt::format("test field {} does not vanish near atom {}", v.id(), k + 1));
      double extra = 0.0;
      const auto& w = grid->weights();
      for (std::size_t i = 0; i < grid->node_count(); ++i) {
        const Point x = grid->coord(i);
        const auto vv = v.value(x);
        if (vv[0] == 0.0 && vv[1] == 0.0 && vv[2] == 0.0) continue;
        const double m = phi[i] - 1.0;
        if (m == 0.0) continue;
        const auto gU = eval_U_gradient(x, sys.atoms);
        const int nc = grid->vector_components();
        double d = 0.0;
        for (int c = 0; c < nc; ++c) d += gU[c] * vv[c];
        extra += w[i] * m * m * d;
      }
      return weak_pairing(stress.vdw, v) - sys.params.solvent_density * extra;
    }
    case StressTerm::ele:
    default: {
      const auto gpsi = gradient(psi);
      const auto vs = v.sample(grid);
      const auto d = dot(gpsi, vs);
      std::vector<double> integrand(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) integrand[i] = sys.rho[i] * d[i];
      return weak_pairing(stress.ele, v) + integrate(grid, integrand);
    }
  }
}

double tensor_pairing(const TensorField& t, const TensorField& psi) { return integrate(t.grid(), contract(t, psi)); }

double force_pairing(const VectorField& f, const TestField& v) {
  return integrate(f.grid(), dot(f, v.sample(f.grid())));
}

double curvature_pairing(const ScalarField& phi, double xi, const TestField& v) {
  const auto gphi = phi_gradient(phi);
  const auto lap = phi_laplacian(phi);
  const auto vs = v.sample(phi.grid());
  const auto d = dot(gphi, vs);
  std::vector<double> integrand(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) integrand[i] = (-xi * lap[i] + eval_W_prime(phi[i]) / xi) * d[i];
  return integrate(phi.grid(), integrand);
}

// ---- sharp interface ---------------------------------------------------------

namespace {

struct Trace {
  double psi_in = 0.0, psi_out = 0.0;
  double dn_in = 0.0, dn_out = 0.0;
  Point grad_in{0, 0, 0}, grad_out{0, 0, 0};
};

// Quadratic through (r_k, f_k): value and derivative at r.
std::pair<double, double> quad_eval(const std::array<double, 3>& rs, const std::array<double, 3>& fs, double r) {
  double v = 0.0, d = 0.0;
  for (int a = 0; a < 3; ++a) {
    double l = 1.0, denom = 1.0, dl = 0.0;
    for (int b = 0; b < 3; ++b) {
      if (b == a) continue;
      denom *= rs[a] - rs[b];
      l *= r - rs[b];
    }
    for (int b = 0; b < 3; ++b) {
      if (b == a) continue;
      double prod = 1.0;
      for (int c = 0; c < 3; ++c)
        if (c != a && c != b) prod *= r - rs[c];
      dl += prod;
    }
    v += fs[a] * l / denom;
    d += fs[a] * dl / denom;
  }
  return {v, d};
}

Trace radial_trace(const ScalarField& psi, double R) {
  const auto& g = *psi.grid();
  const double h = g.h(0);
  const int kin = static_cast<int>(std::floor(R / h + 1e-9));
  const int kout = static_cast<int>(std::ceil(R / h - 1e-9));
  if (kin < 2 || kout + 2 > g.cells(0))
    throw ResolutionError("interface too close to the radial grid ends for trace extraction");
  Trace t;
  const std::array<double, 3> rin{(kin - 2) * h, (kin - 1) * h, kin * h};
  const std::array<double, 3> fin{psi[kin - 2], psi[kin - 1], psi[kin]};
  const std::array<double, 3> rout{kout * h, (kout + 1) * h, (kout + 2) * h};
  const std::array<double, 3> fout{psi[kout], psi[kout + 1], psi[kout + 2]};
  std::tie(t.psi_in, t.dn_in) = quad_eval(rin, fin, R);
  std::tie(t.psi_out, t.dn_out) = quad_eval(rout, fout, R);
  t.grad_in = {t.dn_in, 0, 0};
  t.grad_out = {t.dn_out, 0, 0};
  return t;
}

Trace cartesian_trace(const ScalarField& psi, const std::vector<ScalarField>& grad, const InterfaceShape& shape,
                      const Point& x, const Point& nu) {
  const auto& g = *psi.grid();
  const double delta = g.max_h();
  static const double L[3] = {6.0, -8.0, 3.0};      // extrapolation weights at s = 0 from s = 2, 3, 4
  static const double dL[3] = {-3.5, 6.0, -2.5};    // derivative weights (per unit spacing)
  Trace t;
  for (int side = 0; side < 2; ++side) {
    const double sgn = side == 0 ? -1.0 : 1.0;  // inside moves against the outward normal
    double val = 0.0, der = 0.0;
    Point gr{0, 0, 0};
    for (int k = 0; k < 3; ++k) {
      const double s = (k + 2) * delta;
      const Point p{x[0] + sgn * s * nu[0], x[1] + sgn * s * nu[1], x[2] + sgn * s * nu[2]};
      for (int d = 0; d < g.dim(); ++d)
        if (p[d] < g.lo(d) + delta || p[d] > g.hi(d) - delta)
          throw ResolutionError("trace stencil leaves the domain");
      const double dist = shape.signed_distance(p);
      if ((side == 0 && dist < 1.5 * delta) || (side == 1 && dist > -1.5 * delta))
        throw ResolutionError("trace stencil crosses the interface; curvature is under-resolved");
      const double f = interpolate(psi, p);
      val += L[k] * f;
      der += dL[k] * f;
      for (int d = 0; d < g.dim(); ++d) gr[d] += L[k] * interpolate(grad[d], p);
    }
    der /= delta;
    if (side == 0) {
      t.psi_in = val;
      t.dn_in = -der;
      t.grad_in = gr;
    } else {
      t.psi_out = val;
      t.dn_out = der;
      t.grad_out = gr;
    }
  }
  return t;
}

}  // namespace

SharpForces sharp_boundary_force(const PhaseFieldSystem& sys, const InterfaceShape& shape, const PBSolution& sharp,
                                 const TestField& v) {
  if (sharp.mode != PBMode::sharp) throw ConsistencyError("sharp_boundary_force needs a sharp-mode PB solution");
  require_same_grid(sys.grid, sharp.psi.grid());
  const auto& g = *sys.grid;
  const auto& p = sys.params;
  const int gdim = geometric_dim(g);
  const double H = shape.mean_curvature();
  const double eps_p = sys.dielectric.eps_p, eps_w = sys.dielectric.eps_w;

  std::vector<ScalarField> grad_components;
  if (!g.is_radial()) {
    const auto gpsi = gradient(sharp.psi);
    for (int d = 0; d < g.dim(); ++d) {
      ScalarField c(sys.grid);
      auto& cv = c.values();
      for (std::size_t i = 0; i < cv.size(); ++i) cv[i] = gpsi.at(i, d);
      grad_components.push_back(std::move(c));
    }
  }

  SharpForces out;
  const int level = g.is_radial() ? 0 : 1;
  for (const auto& node : shape.surface_nodes(g, level)) {
    BoundaryForceSample s;
    s.x = node.x;
    s.normal = node.normal;
    s.weight = node.weight;
    const Trace t = g.is_radial() ? radial_trace(sharp.psi, shape.radius())
                                  : cartesian_trace(sharp.psi, grad_components, shape, node.x, node.normal);
    s.psi = 0.5 * (t.psi_in + t.psi_out);
    s.dn_inside = t.dn_in;
    s.dn_outside = t.dn_out;
    Point gt{0, 0, 0};
    for (int d = 0; d < 3; ++d) gt[d] = 0.5 * (t.grad_in[d] + t.grad_out[d]);
    const double gn = gt[0] * node.normal[0] + gt[1] * node.normal[1] + gt[2] * node.normal[2];
    for (int d = 0; d < 3; ++d) gt[d] -= gn * node.normal[d];
    s.tangential_sq = g.is_radial() ? 0.0 : gt[0] * gt[0] + gt[1] * gt[1] + gt[2] * gt[2];
    const double D = 0.5 * (eps_p * t.dn_in + eps_w * t.dn_out);
    s.f_vol = -p.pressure;
    s.f_sur = -2.0 * p.surface_tension * H;
    s.f_vdw = sys.atoms.empty() ? 0.0 : p.solvent_density * eval_U_capped(node.x, sys.atoms, sys.u_cap);
    s.f_ele = -0.5 * (1.0 / eps_p - 1.0 / eps_w) * D * D - 0.5 * (eps_w - eps_p) * s.tangential_sq -
              B_or_zero(s.psi, sys);

    const auto V = v.value(node.x);
    const auto J = v.jacobian(node.x);
    const double nv = V[0] * node.normal[0] + V[1] * node.normal[1] + V[2] * node.normal[2];
    double tang_div = 0.0;  // (I - nu (x) nu) : grad V
    for (int a = 0; a < gdim; ++a) {
      tang_div += J[a * 3 + a];
      for (int b = 0; b < gdim; ++b) tang_div -= node.normal[a] * J[a * 3 + b] * node.normal[b];
    }
    out.weak_vol += node.weight * s.f_vol * nv;
    out.weak_sur += -p.surface_tension * node.weight * tang_div;
    out.weak_vdw += node.weight * s.f_vdw * nv;
    out.weak_ele += node.weight * s.f_ele * nv;
    out.samples.push_back(s);
  }
  return out;
}

std::pair<double, double> dielectric_force_identity_check(const PhaseFieldSystem& sys, const InterfaceShape& shape,
                                                          const PBSolution& sharp, const TestField& v) {
  const auto forces = sharp_boundary_force(sys, shape, sharp, v);
  const double surface_side = -forces.weak_ele;
  const auto& g = *sys.grid;
  const auto& psi = sharp.psi;
  const double eps_p = sys.dielectric.eps_p, eps_w = sys.dielectric.eps_w;
  double bulk = 0.0;

  if (g.is_radial()) {
    const double h = g.h(0), R = shape.radius();
    auto piece = [&](double lo, double hi, double psi_lo, double slope, bool inside) {
      const double eps = inside ? eps_p : eps_w;
      double s = 0.0;
      for (const auto& q : gauss_legendre(lo, hi, 2)) {
        const double r = q.x;
        const double u = psi_lo + slope * (r - lo);
        const double B = inside ? 0.0 : B_or_zero(u, sys);
        const double rr = 0.5 * eps * slope * slope - B;
        const double tt = -0.5 * eps * slope * slope - B;
        const auto J = v.jacobian({r, 0, 0});
        const double vr = v.value({r, 0, 0})[0];
        const double rho = smeared_charge_density({r, 0, 0}, sys.atoms, 3);
        s += q.w * 4.0 * std::numbers::pi * r * r * (rr * J[0] + 2.0 * tt * J[4] - rho * slope * vr);
      }
      return s;
    };
    for (int i = 0; i < g.cells(0); ++i) {
      const double a = i * h, b = a + h;
      const double slope = (psi[i + 1] - psi[i]) / h;
      if (b <= R) {
        bulk += piece(a, b, psi[i], slope, true);
      } else if (a >= R) {
        bulk += piece(a, b, psi[i], slope, false);
      } else {
        const double theta = (R - a) / h;
        const double eps_eff = 1.0 / (theta / eps_p + (1.0 - theta) / eps_w);
        const double D = eps_eff * slope;
        const double psi_R = psi[i] + D / eps_p * (R - a);
        bulk += piece(a, R, psi[i], D / eps_p, true);
        bulk += piece(R, b, psi_R, D / eps_w, false);
      }
    }
    return {bulk, surface_side};
  }

  const auto gpsi = gradient(psi);
  const auto gv = v.sample_gradient(sys.grid);
  const auto vs = v.sample(sys.grid);
  TensorField T(sys.grid);
  std::vector<double> extra(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double d = shape.signed_distance(g.coord(i));
    const double chi = d > 0 ? 1.0 : (d < 0 ? 0.0 : 0.5);
    const double eps = chi * eps_p + (1.0 - chi) * eps_w;
    const double m = 1.0 - chi;
    set_tensor(T, i, -(0.5 * eps * norm_sq(gpsi, i) + m * m * B_or_zero(psi[i], sys)), gpsi, eps);
    double gv_dot = 0.0;
    for (int c = 0; c < gpsi.components(); ++c) gv_dot += gpsi.at(i, c) * vs.at(i, c);
    extra[i] = sys.rho[i] * gv_dot;
  }
  bulk = integrate(sys.grid, contract(T, gv)) - integrate(sys.grid, extra);
  return {bulk, surface_side};
}

}  // namespace solvate
