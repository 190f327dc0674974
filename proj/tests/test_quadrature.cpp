#include <cmath>
#include <numbers>
#include <vector>

#include "acdma/quadrature.hpp"
#include "doctest.h"

using namespace acdma;
using std::numbers::pi;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int n : {1, 2, 5, 16, 32, 64}) {
    const auto rule = gauss_legendre(n, -1.0, 2.0);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(3.0).epsilon(1e-14));
    const int deg = 2 * n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], deg);
    const double exact = (std::pow(2.0, deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1);
    CHECK(acc == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("panels put jumps on boundaries") {
  const std::vector<double> bp{-2.0, 0.5, 3.0};
  const auto rule = gauss_legendre_panels(bp, 64);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * (rule.nodes[i] < 0.5 ? 1.0 : 4.0);
  CHECK(acc == doctest::Approx(2.5 + 10.0).epsilon(1e-14));
}

TEST_CASE("periodic trapezoid is spectrally accurate") {
  const auto rule = periodic_trapezoid(64, -pi, pi);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * std::exp(std::cos(rule.nodes[i]));
  CHECK(acc == doctest::Approx(2 * pi * std::cyl_bessel_i(0.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("adaptive Simpson") {
  CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, pi) == doctest::Approx(2.0).epsilon(1e-10));
  const std::vector<double> bp{0.0, 1.0, 2.0};
  CHECK(integrate_piecewise([](double x) { return x < 1.0 ? x : 5.0; }, bp) ==
        doctest::Approx(5.5).epsilon(1e-12));
  SimpsonOptions tight;
  tight.rel_tol = 1e-14;
  tight.max_depth = 3;
  CHECK_THROWS_AS(adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, tight), QuadratureError);
}
