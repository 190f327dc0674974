#pragma once

// Chip-pulse waveforms and the spectral quantities derived from them.
//
// Conventions used throughout the library:
//  * Psi(w) is the transmitted chip spectrum, normalized so that
//    (1/2pi) * integral |Psi(w)|^2 dw = 1 (unit energy).
//  * Phi(w) is the chip spectrum at the front-end output:
//      Type A: Psi(w) restricted to |w| <= pi r / T_c,
//      Type B: |Psi(w)|^2 / sqrt(T_c) (chip-matched filter, chip-rate sampling).
//  * The chip-rate folded transform of Phi with sub-chip delay tau is
//      phi(W, tau) = (1/T_c) sum_s exp(j tau (W + 2 pi s) / T_c) conj(Phi((W + 2 pi s) / T_c)),
//    summed over every alias s whose frequency lies inside the support of Phi.

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace acdma {

using cdouble = std::complex<double>;

enum class FrontEndKind { TypeA, TypeB };

struct FrontEnd {
  FrontEndKind kind = FrontEndKind::TypeA;
  int oversampling = 1;  // r; always 1 for Type B

  static FrontEnd type_a(int r);
  static FrontEnd type_b();
};

struct SincShape {
  double gamma = 1.0;  // bandwidth B = gamma / (2 T_c)
};

struct RootRaisedCosineShape {
  double rolloff = 0.0;  // bandwidth B = (1 + rolloff) / (2 T_c)
};

// Complex transmit spectrum Psi on a uniform grid (rad/s), linearly interpolated.
struct TabulatedShape {
  double omega_min = 0.0;
  double omega_step = 0.0;
  std::vector<cdouble> values;
};

using PulseShape = std::variant<SincShape, RootRaisedCosineShape, TabulatedShape>;

// Raised-cosine energy spectrum for T_c = 1:
// 1 on |w| <= pi(1-a), 0 beyond pi(1+a), half-sine transition in between.
double raised_cosine_spectrum(double omega, double rolloff);

class ChipPulse {
 public:
  static ChipPulse sinc(double gamma, double chip_interval, FrontEnd front_end);
  static ChipPulse root_raised_cosine(double rolloff, double chip_interval, FrontEnd front_end);
  // Samples (omega, Psi) on any ascending grid; resampled onto `resolution`
  // uniform points over the sample range and normalized to unit energy.
  static ChipPulse tabulated(const std::vector<double>& omega, const std::vector<cdouble>& psi,
                             double chip_interval, FrontEnd front_end,
                             std::size_t resolution = 4096);
  // Two-column text: "omega re,im" per line; '#' starts a comment.
  static ChipPulse load_tabulated(const std::filesystem::path& path, double chip_interval,
                                  FrontEnd front_end, std::size_t resolution = 4096);

  const PulseShape& shape() const { return shape_; }
  const FrontEnd& front_end() const { return front_end_; }
  double chip_interval() const { return chip_interval_; }
  int oversampling() const { return front_end_.oversampling; }
  bool is_type_a() const { return front_end_.kind == FrontEndKind::TypeA; }

  // One-sided bandwidth in Hz.
  double bandwidth() const;
  // Largest |w| (rad/s) at which Phi can be non-zero.
  double support() const;
  // Ascending angular frequencies (rad/s) covering [-support, support] at which
  // |Phi| is not smooth (band edges, roll-off knees).
  std::vector<double> breakpoints() const;

  // Transmit spectrum Psi(w), unit energy.
  cdouble transmit_spectrum(double omega) const;
  // Spectrum at the front-end output, Phi(w).
  cdouble spectrum(double omega) const;

 private:
  ChipPulse(PulseShape shape, double chip_interval, FrontEnd front_end);
  void validate() const;

  PulseShape shape_;
  double chip_interval_ = 1.0;
  FrontEnd front_end_;
  double energy_scale_ = 1.0;  // 1/sqrt(E_psi) applied to tabulated input
};

// Phi(w) at the front-end output; zero outside the support.
cdouble continuous_spectrum(const ChipPulse& pulse, double omega);

// phi(W, tau): the chip-rate folded transform (2pi-periodic in W).
cdouble folded_transform(const ChipPulse& pulse, double Omega, double tau);

// Delta(W, tau) with entry t = phi(W, tau - t T_c / r), t = 0..r-1.
Eigen::VectorXcd delta_vector(const ChipPulse& pulse, double Omega, double tau);

// Q(W, tau) = Delta Delta^H.
Eigen::MatrixXcd q_matrix(const ChipPulse& pulse, double Omega, double tau);

// Delay-averaged part Q(W): alias sum of |Phi|^2 with phases exp(-j (k-l)(W + 2 pi s)/r).
Eigen::MatrixXcd q_matrix_mean(const ChipPulse& pulse, double Omega);

// Closed form of Q(W, tau) for a chip-matched front end with a root-raised-cosine
// chip (T_c = 1 units, tau in chips).
double q_scalar_frontend_b(double rolloff, double Omega, double tau_over_tc);

// Normalized frequency W in [-pi, pi] at which the folded transform has kinks.
std::vector<double> folded_breakpoints(const ChipPulse& pulse);

struct EnergyCoefficient {
  int order = 1;
  double value = 0.0;                  // closed form for sinc, quadrature otherwise
  double quadrature = 0.0;             // always computed
  std::optional<double> closed_form;   // sinc: gamma^(1-s); rrc: tabulated textbook form
};

// E_s = (1 / (2 pi T_c^s)) * integral T_c |Phi(w)|^(2s) dw.
EnergyCoefficient energy_coefficient(const ChipPulse& pulse, int s);

// Quadrature path only.
double energy_coefficient_quadrature(const ChipPulse& pulse, int s);

// E_s for a root-raised-cosine chip as printed in closed form,
// 2^s (1 - a) + (1/pi) integral_{pi(1-a)}^{pi(1+a)} sin^s((pi - w) / (2a)) dw.
// Reported next to the quadrature value for comparison; not used in computations.
double rrc_energy_closed_form_printed(double rolloff, int s);

// e(W) = r^{-1/2} (1, exp(-jW/r), ..., exp(-j(r-1)W/r))^T.
Eigen::VectorXcd fourier_phase_vector(double Omega, int r);

// Unitary basis U(W) whose columns are phase vectors at the aliased frequencies
// W + 2 pi s, s = -sign(W) floor((r-1)/2) .. sign(W) floor(r/2).
Eigen::MatrixXcd phase_basis(double Omega, int r);

}  // namespace acdma
