#include "acdma/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "acdma/quadrature.hpp"

namespace acdma {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Reduce to [-pi, pi).
double wrap_pi(double x) {
  double y = std::fmod(x + kPi, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  return y - kPi;
}

bool at_edge(double w, double edge) { return std::abs(w - edge) <= 1e-12 * edge; }

// sqrt of the raised-cosine spectrum (T_c = 1). In the knee,
// 1 - sin x = 2 sin^2(pi/4 - x/2), so the root is a plain cosine.
// A jump (rolloff 0) takes the midpoint value.
double sqrt_raised_cosine(double omega, double a) {
  const double w = std::abs(omega);
  if (a <= 0.0) {
    if (at_edge(w, kPi)) return 0.5;
    return w < kPi ? 1.0 : 0.0;
  }
  if (w <= kPi * (1.0 - a)) return 1.0;
  if (w >= kPi * (1.0 + a)) return 0.0;
  const double x = (w - kPi) / (2.0 * a);
  return std::cos(0.25 * kPi + 0.5 * x);
}

double raised_cosine(double omega, double a) {
  if (a <= 0.0) {
    const double w = std::abs(omega);
    if (at_edge(w, kPi)) return 0.5;
    return w < kPi ? 1.0 : 0.0;
  }
  const double s = sqrt_raised_cosine(omega, a);
  return s * s;
}

cdouble interp_table(const TabulatedShape& t, double omega) {
  if (t.values.empty()) return 0.0;
  const double u = (omega - t.omega_min) / t.omega_step;
  if (u < 0.0 || u > static_cast<double>(t.values.size() - 1)) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(u), t.values.size() - 2);
  const double f = u - static_cast<double>(i);
  return (1.0 - f) * t.values[i] + f * t.values[i + 1];
}

}  // namespace

FrontEnd FrontEnd::type_a(int r) {
  if (r < 1) throw std::invalid_argument("front end A: oversampling r must be >= 1");
  return FrontEnd{FrontEndKind::TypeA, r};
}

FrontEnd FrontEnd::type_b() { return FrontEnd{FrontEndKind::TypeB, 1}; }

double raised_cosine_spectrum(double omega, double rolloff) { return raised_cosine(omega, rolloff); }

ChipPulse::ChipPulse(PulseShape shape, double chip_interval, FrontEnd front_end)
    : shape_(std::move(shape)), chip_interval_(chip_interval), front_end_(front_end) {
  if (front_end_.kind == FrontEndKind::TypeB) front_end_.oversampling = 1;
}

ChipPulse ChipPulse::sinc(double gamma, double chip_interval, FrontEnd front_end) {
  ChipPulse p(SincShape{gamma}, chip_interval, front_end);
  p.validate();
  return p;
}

ChipPulse ChipPulse::root_raised_cosine(double rolloff, double chip_interval, FrontEnd front_end) {
  ChipPulse p(RootRaisedCosineShape{rolloff}, chip_interval, front_end);
  p.validate();
  return p;
}

ChipPulse ChipPulse::tabulated(const std::vector<double>& omega, const std::vector<cdouble>& psi,
                               double chip_interval, FrontEnd front_end, std::size_t resolution) {
  if (omega.size() != psi.size() || omega.size() < 2)
    throw std::invalid_argument("tabulated pulse: need at least two (omega, value) samples");
  if (resolution < 2) throw std::invalid_argument("tabulated pulse: resolution must be >= 2");
  for (std::size_t i = 1; i < omega.size(); ++i) {
    if (!(omega[i] > omega[i - 1]))
      throw std::invalid_argument("tabulated pulse: frequency grid must be strictly increasing");
  }
  TabulatedShape t;
  t.omega_min = omega.front();
  t.omega_step = (omega.back() - omega.front()) / static_cast<double>(resolution - 1);
  t.values.resize(resolution);
  std::size_t j = 0;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double w = t.omega_min + t.omega_step * static_cast<double>(i);
    while (j + 2 < omega.size() && omega[j + 1] < w) ++j;
    const double f = std::clamp((w - omega[j]) / (omega[j + 1] - omega[j]), 0.0, 1.0);
    t.values[i] = (1.0 - f) * psi[j] + f * psi[j + 1];
  }
  // Exact energy of the piecewise-linear interpolant.
  double energy = 0.0;
  for (std::size_t i = 0; i + 1 < resolution; ++i) {
    const cdouble a = t.values[i];
    const cdouble b = t.values[i + 1];
    energy += t.omega_step * (std::norm(a) + std::real(a * std::conj(b)) + std::norm(b)) / 3.0;
  }
  energy /= kTwoPi;
  if (!(energy > 0.0)) throw std::invalid_argument("tabulated pulse: spectrum has zero energy");
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& v : t.values) v *= scale;

  ChipPulse p(std::move(t), chip_interval, front_end);
  p.validate();
  return p;
}

ChipPulse ChipPulse::load_tabulated(const std::filesystem::path& path, double chip_interval,
                                    FrontEnd front_end, std::size_t resolution) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pulse table " + path.string());
  std::vector<double> omega;
  std::vector<cdouble> psi;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double w = 0.0, re = 0.0, im = 0.0;
    if (!(ss >> w >> re >> im)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'omega re,im'");
    }
    omega.push_back(w);
    psi.emplace_back(re, im);
  }
  return tabulated(omega, psi, chip_interval, front_end, resolution);
}

void ChipPulse::validate() const {
  if (!(chip_interval_ > 0.0)) throw std::invalid_argument("chip interval must be positive");
  std::visit(overloaded{
                 [](const SincShape& s) {
                   if (!(s.gamma > 0.0 && s.gamma <= 2.0))
                     throw std::invalid_argument("sinc pulse: gamma must lie in (0, 2]");
                 },
                 [](const RootRaisedCosineShape& s) {
                   if (!(s.rolloff >= 0.0 && s.rolloff <= 1.0))
                     throw std::invalid_argument("root-raised-cosine pulse: rolloff must lie in [0, 1]");
                 },
                 [](const TabulatedShape&) {},
             },
             shape_);

  if (front_end_.kind == FrontEndKind::TypeA) {
    const double limit = front_end_.oversampling / (2.0 * chip_interval_);
    if (bandwidth() > limit * (1.0 + 1e-12)) {
      throw std::invalid_argument("front end A: bandwidth " + std::to_string(bandwidth()) +
                                  " exceeds r/(2 T_c) = " + std::to_string(limit) +
                                  "; increase the oversampling factor");
    }
    return;
  }

  // Front end B needs a root-Nyquist chip.
  if (const auto* s = std::get_if<SincShape>(&shape_); s && s->gamma != 1.0)
    throw std::invalid_argument("front end B requires a root-Nyquist chip; sinc needs gamma = 1");
  if (std::holds_alternative<TabulatedShape>(shape_)) {
    for (int i = 0; i < 64; ++i) {
      const double w = (-kPi + kTwoPi * (i + 0.5) / 64.0) / chip_interval_;
      double fold = 0.0;
      const int smax = static_cast<int>(std::ceil(support() * chip_interval_ / kTwoPi)) + 1;
      for (int s = -smax; s <= smax; ++s)
        fold += std::norm(transmit_spectrum(w + kTwoPi * s / chip_interval_));
      if (std::abs(fold - chip_interval_) > 1e-3 * chip_interval_)
        throw std::invalid_argument("front end B requires a root-Nyquist chip; tabulated spectrum fails the Nyquist test");
    }
  }
}

double ChipPulse::bandwidth() const {
  return std::visit(overloaded{
                        [&](const SincShape& s) { return s.gamma / (2.0 * chip_interval_); },
                        [&](const RootRaisedCosineShape& s) {
                          return (1.0 + s.rolloff) / (2.0 * chip_interval_);
                        },
                        [&](const TabulatedShape& t) {
                          double edge = 0.0;
                          for (std::size_t i = 0; i < t.values.size(); ++i) {
                            if (std::abs(t.values[i]) > 0.0) {
                              edge = std::max(edge, std::abs(t.omega_min + t.omega_step * i));
                            }
                          }
                          return edge / kTwoPi;
                        },
                    },
                    shape_);
}

double ChipPulse::support() const {
  const double edge = kTwoPi * bandwidth();
  if (front_end_.kind == FrontEndKind::TypeA)
    return std::min(edge, kPi * front_end_.oversampling / chip_interval_);
  return edge;
}

std::vector<double> ChipPulse::breakpoints() const {
  const double tc = chip_interval_;
  std::vector<double> bp;
  std::visit(overloaded{
                 [&](const SincShape& s) {
                   bp = {-kPi * s.gamma / tc, kPi * s.gamma / tc};
                 },
                 [&](const RootRaisedCosineShape& s) {
                   const double lo = kPi * (1.0 - s.rolloff) / tc;
                   const double hi = kPi * (1.0 + s.rolloff) / tc;
                   bp = {-hi, -lo, lo, hi};
                 },
                 [&](const TabulatedShape&) { bp = {-support(), support()}; },
             },
             shape_);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

cdouble ChipPulse::transmit_spectrum(double omega) const {
  const double tc = chip_interval_;
  return std::visit(overloaded{
                        [&](const SincShape& s) -> cdouble {
                          const double w = std::abs(omega);
                          const double edge = kPi * s.gamma / tc;
                          if (at_edge(w, edge)) return 0.5 * std::sqrt(tc / s.gamma);
                          return w < edge ? std::sqrt(tc / s.gamma) : 0.0;
                        },
                        [&](const RootRaisedCosineShape& s) -> cdouble {
                          return std::sqrt(tc) * sqrt_raised_cosine(omega * tc, s.rolloff);
                        },
                        [&](const TabulatedShape& t) -> cdouble { return interp_table(t, omega); },
                    },
                    shape_);
}

cdouble ChipPulse::spectrum(double omega) const {
  const double edge = support();
  if (std::abs(omega) > edge && !at_edge(std::abs(omega), edge)) return 0.0;
  if (front_end_.kind == FrontEndKind::TypeA) return transmit_spectrum(omega);
  // Chip-matched output |Psi|^2 / sqrt(T_c); jumps again take the midpoint.
  const double tc = chip_interval_;
  return std::visit(overloaded{
                        [&](const SincShape& s) -> cdouble {
                          const double w = std::abs(omega);
                          const double edge = kPi * s.gamma / tc;
                          if (at_edge(w, edge)) return 0.5 * std::sqrt(tc) / s.gamma;
                          return w < edge ? std::sqrt(tc) / s.gamma : 0.0;
                        },
                        [&](const RootRaisedCosineShape& s) -> cdouble {
                          return std::sqrt(tc) * raised_cosine(omega * tc, s.rolloff);
                        },
                        [&](const TabulatedShape& t) -> cdouble {
                          return std::norm(interp_table(t, omega)) / std::sqrt(tc);
                        },
                    },
                    shape_);
}

cdouble continuous_spectrum(const ChipPulse& pulse, double omega) { return pulse.spectrum(omega); }

cdouble folded_transform(const ChipPulse& pulse, double Omega, double tau) {
  const double tc = pulse.chip_interval();
  const double W = wrap_pi(Omega);
  const double edge = pulse.support() * tc;
  const int s_lo = static_cast<int>(std::ceil((-edge - W) / kTwoPi));
  const int s_hi = static_cast<int>(std::floor((edge - W) / kTwoPi));
  cdouble acc = 0.0;
  for (int s = s_lo; s <= s_hi; ++s) {
    const double w = W + kTwoPi * s;
    acc += std::polar(1.0, tau * w / tc) * std::conj(pulse.spectrum(w / tc));
  }
  return acc / tc;
}

Eigen::VectorXcd delta_vector(const ChipPulse& pulse, double Omega, double tau) {
  const int r = pulse.oversampling();
  const double tc = pulse.chip_interval();
  Eigen::VectorXcd d(r);
  for (int t = 0; t < r; ++t) d(t) = folded_transform(pulse, Omega, tau - t * tc / r);
  return d;
}

Eigen::MatrixXcd q_matrix(const ChipPulse& pulse, double Omega, double tau) {
  const Eigen::VectorXcd d = delta_vector(pulse, Omega, tau);
  return d * d.adjoint();
}

Eigen::MatrixXcd q_matrix_mean(const ChipPulse& pulse, double Omega) {
  const int r = pulse.oversampling();
  const double tc = pulse.chip_interval();
  const double W = wrap_pi(Omega);
  const double edge = pulse.support() * tc;
  const int s_lo = static_cast<int>(std::ceil((-edge - W) / kTwoPi));
  const int s_hi = static_cast<int>(std::floor((edge - W) / kTwoPi));
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(r, r);
  for (int s = s_lo; s <= s_hi; ++s) {
    const double w = W + kTwoPi * s;
    const double mag = std::norm(pulse.spectrum(w / tc)) / (tc * tc);
    if (mag == 0.0) continue;
    for (int k = 0; k < r; ++k)
      for (int l = 0; l < r; ++l) q(k, l) += mag * std::polar(1.0, -(k - l) * w / r);
  }
  return q;
}

double q_scalar_frontend_b(double rolloff, double Omega, double tau_over_tc) {
  const double W = std::abs(wrap_pi(Omega));
  if (rolloff <= 0.0 || W <= kPi * (1.0 - rolloff)) return 1.0;
  const double u = std::sin((W - kPi) / (2.0 * rolloff));
  const double u2 = u * u;
  return 0.5 + 0.5 * u2 + 0.5 * std::cos(kTwoPi * tau_over_tc) * (1.0 - u2);
}

std::vector<double> folded_breakpoints(const ChipPulse& pulse) {
  const double tc = pulse.chip_interval();
  std::vector<double> out{-kPi, kPi};
  for (double w : pulse.breakpoints()) {
    const double W = wrap_pi(w * tc);
    out.push_back(W);
    out.push_back(-W);
  }
  std::sort(out.begin(), out.end());
  std::vector<double> uniq;
  for (double x : out) {
    if (x < -kPi || x > kPi) continue;
    if (uniq.empty() || x - uniq.back() > 1e-13) uniq.push_back(x);
  }
  return uniq;
}

double energy_coefficient_quadrature(const ChipPulse& pulse, int s) {
  if (s < 1) throw std::invalid_argument("energy coefficient: order s must be >= 1");
  const double tc = pulse.chip_interval();
  const auto bp = pulse.breakpoints();
  const auto f = [&](double w) { return std::pow(std::norm(pulse.spectrum(w)), s); };
  SimpsonOptions opts;
  opts.rel_tol = 1e-10;
  double integral = 0.0;
  try {
    integral = integrate_piecewise(f, bp, opts);
  } catch (const QuadratureError& e) {
    throw QuadratureError("energy coefficient E_" + std::to_string(s) + ": " + e.what());
  }
  return tc * integral / (kTwoPi * std::pow(tc, s));
}

double rrc_energy_closed_form_printed(double rolloff, int s) {
  if (rolloff <= 0.0) return std::pow(2.0, s);
  const auto f = [&](double w) { return std::pow(std::sin((kPi - w) / (2.0 * rolloff)), s); };
  const double integral = adaptive_simpson(f, kPi * (1.0 - rolloff), kPi * (1.0 + rolloff));
  return std::pow(2.0, s) * (1.0 - rolloff) + integral / kPi;
}

EnergyCoefficient energy_coefficient(const ChipPulse& pulse, int s) {
  EnergyCoefficient e;
  e.order = s;
  e.quadrature = energy_coefficient_quadrature(pulse, s);
  e.value = e.quadrature;
  if (const auto* sinc = std::get_if<SincShape>(&pulse.shape()); sinc && pulse.is_type_a()) {
    e.closed_form = std::pow(sinc->gamma, 1.0 - s);
    e.value = *e.closed_form;
  } else if (const auto* rrc = std::get_if<RootRaisedCosineShape>(&pulse.shape())) {
    e.closed_form = rrc_energy_closed_form_printed(rrc->rolloff, s);
  }
  return e;
}

Eigen::VectorXcd fourier_phase_vector(double Omega, int r) {
  if (r < 1) throw std::invalid_argument("fourier_phase_vector: r must be >= 1");
  Eigen::VectorXcd e(r);
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  for (int k = 0; k < r; ++k) e(k) = std::polar(scale, -k * Omega / r);
  return e;
}

Eigen::MatrixXcd phase_basis(double Omega, int r) {
  if (r < 1) throw std::invalid_argument("phase_basis: r must be >= 1");
  const int sgn = Omega < 0.0 ? -1 : 1;
  Eigen::MatrixXcd u(r, r);
  int col = 0;
  for (int s = -(r - 1) / 2; s <= r / 2; ++s) u.col(col++) = fourier_phase_vector(Omega + sgn * kTwoPi * s, r);
  return u;
}

}  // namespace acdma
