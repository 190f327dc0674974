#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// Time-domain sinc chip at the output of front end A, T_c = 1:
// inverse transform of sqrt(1/gamma) on |w| <= pi gamma.
inline double sinc_pulse(double gamma, double t) {
  if (std::abs(t) < 1e-12) return std::sqrt(1.0 / gamma) * gamma;
  return std::sqrt(1.0 / gamma) * std::sin(pi * gamma * t) / (pi * t);
}

// Unit-energy root-raised-cosine chip, T_c = 1.
inline double rrc_pulse(double a, double t) {
  if (std::abs(t) < 1e-9) return 1.0 - a + 4.0 * a / pi;
  if (a > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * a)) < 1e-9) {
    return a / std::sqrt(2.0) *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * a)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * a)));
  }
  const double num = 4.0 * a * t * std::cos(pi * (1.0 + a) * t) + std::sin(pi * (1.0 - a) * t);
  const double den = pi * t * (1.0 - 16.0 * a * a * t * t);
  return num / den;
}

// Raised-cosine (Nyquist) pulse, the chip-matched output of rrc_pulse, T_c = 1.
inline double rc_pulse(double a, double t) {
  const double sinc = std::abs(t) < 1e-12 ? 1.0 : std::sin(pi * t) / (pi * t);
  const double d = 1.0 - 4.0 * a * a * t * t;
  if (std::abs(d) < 1e-9) return pi / 4.0 * (std::abs(t) < 1e-12 ? 1.0 : std::sin(pi / (2 * a)) / (pi / (2 * a)));
  return sinc * std::cos(pi * a * t) / d;
}

// C-infinity taper: 1 on [0, 1/2], smooth decay to 0 at 1.
inline double taper(double x) {
  x = std::abs(x);
  if (x <= 0.5) return 1.0;
  if (x >= 1.0) return 0.0;
  const double u = (x - 0.5) / 0.5;
  const auto h = [](double v) { return v <= 0.0 ? 0.0 : std::exp(-1.0 / v); };
  return h(1.0 - u) / (h(1.0 - u) + h(u));
}

// sum_n p(n + tau) exp(-j W n), smoothly truncated at |n| = n_max.
inline std::complex<double> dtft(const std::function<double(double)>& p, double W, double tau,
                                 int n_max) {
  std::complex<double> acc = 0.0;
  for (int n = -n_max; n <= n_max; ++n) {
    const double w = taper(static_cast<double>(n) / n_max);
    if (w == 0.0) continue;
    acc += w * p(n + tau) * std::polar(1.0, -W * n);
  }
  return acc;
}

}  // namespace oracle
