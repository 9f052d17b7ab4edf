#pragma once

#include <functional>
#include <vector>

namespace solvate {

struct QuadNode {
  double x = 0.0;
  double w = 0.0;
};

/// Adaptive Gauss-Kronrod (15-point) integral of f over [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                          double* error_estimate = nullptr);

/// Composite 8-point Gauss-Legendre rule with `panels` equal panels.
std::vector<QuadNode> gauss_legendre(double a, double b, int panels);

}  // namespace solvate
