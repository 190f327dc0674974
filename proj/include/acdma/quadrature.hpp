#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acdma {

// Raised when an adaptive rule cannot reach its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fixed rule: integral ~= sum_i weights[i] * f(nodes[i]).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Composite Gauss-Legendre over consecutive panels [bp[i], bp[i+1]].
// Roughly total_nodes nodes are distributed proportionally to panel length,
// with at least min_per_panel nodes in every non-empty panel.
QuadratureRule gauss_legendre_panels(std::span<const double> breakpoints, int total_nodes,
                                     int min_per_panel = 16);

// n-point trapezoid for a function with period (b - a); the node at b is dropped.
QuadratureRule periodic_trapezoid(int n, double a, double b);

struct SimpsonOptions {
  double rel_tol = 1e-10;
  double abs_floor = 1e-300;
  int max_depth = 48;
};

// Adaptive Simpson on [a, b]. Throws QuadratureError when max_depth is hit
// before the local error estimate meets the tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const SimpsonOptions& opts = {});

// Adaptive Simpson applied panel by panel between sorted breakpoints, so that
// kinks and jumps of the integrand sit on panel boundaries. Values at a
// breakpoint are taken as one-sided limits from inside each panel.
double integrate_piecewise(const std::function<double(double)>& f,
                           std::span<const double> breakpoints,
                           const SimpsonOptions& opts = {});

}  // namespace acdma
