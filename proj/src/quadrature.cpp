#include "acdma/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace acdma {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

QuadratureRule gauss_legendre_panels(std::span<const double> breakpoints, int total_nodes,
                                     int min_per_panel) {
  QuadratureRule rule;
  if (breakpoints.size() < 2) return rule;
  const double span = breakpoints.back() - breakpoints.front();
  if (!(span > 0.0)) return rule;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    const int n = std::max(min_per_panel,
                           static_cast<int>(std::ceil(total_nodes * (b - a) / span)));
    const auto panel = gauss_legendre(n, a, b);
    rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return rule;
}

QuadratureRule periodic_trapezoid(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("periodic_trapezoid: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, (b - a) / n);
  for (int i = 0; i < n; ++i) rule.nodes[i] = a + (b - a) * i / n;
  return rule;
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  double tol;
  int max_depth;
  bool failed = false;
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (std::abs(delta) <= std::max(15.0 * tol, noise)) return left + right + delta / 15.0;
  if (depth >= st.max_depth) {
    st.failed = true;
    return left + right + delta / 15.0;
  }
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const SimpsonOptions& opts) {
  if (!(b > a)) return 0.0;
  // Scale estimate for the relative tolerance.
  const auto probe = gauss_legendre(32, a, b);
  double scale = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) scale += probe.weights[i] * std::abs(f(probe.nodes[i]));
  const double tol = std::max(opts.rel_tol * scale, opts.abs_floor);

  SimpsonState st{f, tol, opts.max_depth};
  // Start from 8 panels so that a symmetric integrand cannot fool the first estimate.
  constexpr int kStart = 8;
  double total = 0.0;
  for (int i = 0; i < kStart; ++i) {
    const double lo = a + (b - a) * i / kStart;
    const double hi = a + (b - a) * (i + 1) / kStart;
    const double flo = f(lo);
    const double fmid = f(0.5 * (lo + hi));
    const double fhi = f(hi);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += simpson_step(st, lo, hi, flo, fmid, fhi, whole, tol / kStart, 0);
  }
  if (st.failed) {
    throw QuadratureError("adaptive_simpson: tolerance " + std::to_string(opts.rel_tol) +
                          " not met on [" + std::to_string(a) + ", " + std::to_string(b) +
                          "] after maximum refinement");
  }
  return total;
}

double integrate_piecewise(const std::function<double(double)>& f,
                           std::span<const double> breakpoints, const SimpsonOptions& opts) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    // Endpoint samples are nudged inside so that a jump sitting on a
    // breakpoint contributes its one-sided limit.
    const double nudge = 1e-10 * std::max({1.0, std::abs(a), std::abs(b)});
    const double lo = a + std::min(nudge, 0.25 * (b - a));
    const double hi = b - std::min(nudge, 0.25 * (b - a));
    const auto inner = [&](double x) { return f(std::clamp(x, lo, hi)); };
    total += adaptive_simpson(inner, a, b, opts);
  }
  return total;
}

}  // namespace acdma
