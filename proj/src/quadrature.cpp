#include "solvate/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace solvate {

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          double* error_estimate) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, tol, &err);
  if (error_estimate) *error_estimate = err;
  return v;
}

std::vector<QuadNode> gauss_legendre(double a, double b, int panels) {
  using rule = boost::math::quadrature::gauss<double, 8>;
  const auto& xs = rule::abscissa();
  const auto& ws = rule::weights();
  std::vector<QuadNode> out;
  out.reserve(static_cast<std::size_t>(panels) * 8);
  const double len = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * len, half = 0.5 * len;
    // Boost stores the non-negative half of a symmetric rule.
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k] == 0.0) {
        out.push_back({mid, half * ws[k]});
      } else {
        out.push_back({mid - half * xs[k], half * ws[k]});
        out.push_back({mid + half * xs[k], half * ws[k]});
      }
    }
  }
  return out;
}

}  // namespace solvate
