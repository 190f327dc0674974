#pragma once

// Large-system limits of the diagonal elements of powers of the correlation
// matrix and the resulting eigenvalue moments.

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "acdma/pulse.hpp"

namespace acdma {

class MomentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One atom of the joint received-power / sub-chip-delay distribution.
struct PowerDelayAtom {
  double power = 1.0;  // lambda = |a|^2
  double delay = 0.0;  // tau in [0, T_c)
  double prob = 1.0;
};

struct SystemEnsemble {
  double load = 0.5;   // beta = K / N
  double n0 = 0.1;     // raw noise spectral density; sigma^2 via noise_variance()
  std::vector<PowerDelayAtom> atoms{PowerDelayAtom{}};
  // Delays independent of powers and uniform on [0, T_c); atom delays then
  // only mark where per-atom diagonal elements are reported.
  bool uniform_delay = false;

  static SystemEnsemble equal_power(double load, double n0, bool uniform_delay = false);

  double power_moment(int s) const;
  // Throws std::invalid_argument on a violated invariant.
  void validate(double chip_interval) const;
};

// sigma^2 at the front-end output: N0 r / T_c (type A) or N0 / T_c (type B),
// for a unit-energy chip.
double noise_variance(const SystemEnsemble& ensemble, const ChipPulse& pulse);
double noise_variance(double n0, const ChipPulse& pulse);

enum class Provenance { Theorem1, Corollary1, Theorem2, Algorithm1 };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

enum class ClassRole {
  Atom,       // ensemble atom j, always stored at index j
  DelayNode,  // quadrature node of a uniform delay distribution
  Probe,      // extra evaluation point, no contribution to expectations
};

const char* to_string(ClassRole r);

struct UserClass {
  double power = 1.0;
  double delay = 0.0;
  double weight = 0.0;  // share in expectations over the ensemble
  ClassRole role = ClassRole::Atom;
};

struct MomentTable {
  Provenance provenance = Provenance::Theorem1;
  int depth = 0;
  double load = 0.0;
  int oversampling = 1;
  double chip_interval = 1.0;

  std::vector<UserClass> classes;
  std::vector<std::vector<double>> R;  // R[class][ell], ell = 0..depth
  std::vector<double> eig_moments;     // m[ell], ell = 0..depth; m[0] = 1

  // Frequency samples: normalized W in [-pi, pi] (Theorem 1) or rad/s (scalar paths).
  std::vector<double> grid;
  std::vector<double> grid_weights;
  std::vector<std::vector<Eigen::MatrixXcd>> T;  // T[ell][i]; 1x1 on scalar paths

  std::vector<double> nu;  // scalar paths: nu_ell
  std::vector<double> f;   // scalar paths: f(R_ell)

  std::size_t atom_count() const;
  double R_at(std::size_t cls, int ell) const { return R.at(cls).at(ell); }
  // Eigenvalue moments m^(1..n).
  std::vector<double> moments(int n) const;

  // Text form: '#' header, CSV of classes and R, then CSV of m.
  void write(std::ostream& os) const;
  static MomentTable read(std::istream& is);
};

enum class FrequencyRule { GaussLegendrePanels, PeriodicTrapezoid };

struct RecursionOptions {
  int grid_size = 1024;
  FrequencyRule rule = FrequencyRule::GaussLegendrePanels;
  int delay_nodes = 32;
  // Extra (lambda, tau) points evaluated alongside the ensemble.
  std::vector<std::pair<double, double>> probes;
};

// Coupled matrix recursion for arbitrary joint power/delay distributions.
MomentTable theorem1_recursion(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth,
                               const RecursionOptions& opts = {});

// Scalar recursion for uniform delays and B <= r / (2 T_c), front end A.
MomentTable corollary1_recursion(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth,
                                 const RecursionOptions& opts = {});

// Scalar recursion for B <= 1 / (2 T_c); any delay distribution.
MomentTable theorem2_recursion(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth,
                               const RecursionOptions& opts = {});

// Dense real polynomial, coefficient k multiplies x^k.
using Polynomial = std::vector<double>;

double evaluate(const Polynomial& p, double x);
// Replace x^k (k >= 1) by values[k-1]; the constant term is kept.
double substitute_monomials(const Polynomial& p, std::span<const double> values);

struct MomentPolynomials {
  std::vector<Polynomial> rho;  // rho_ell(z)
  std::vector<Polynomial> mu;   // mu_ell(y)
  std::vector<double> U;        // U_ell
  std::vector<double> V;        // V_ell
  std::vector<double> energy_over_tc;  // E_s / T_c, s = 1..depth
  std::vector<double> power_moments;   // m_|A|^2^(s), s = 1..depth
};

inline constexpr int kAlgorithm1MaxDepth = 16;

// Polynomial recursion from the coefficients alone.
MomentPolynomials algorithm1_polynomials(double load, int r, double chip_interval,
                                         std::span<const double> energy,
                                         std::span<const double> power_moments, int depth);

struct Algorithm1Result {
  MomentPolynomials polynomials;
  MomentTable table;
};

Algorithm1Result algorithm1(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth);

// m^(1..5) written out in beta, E_s and the power moments.
std::array<double, 5> closed_form_moments(double load, int r, double chip_interval,
                                          std::span<const double, 5> energy,
                                          std::span<const double, 5> power_moments);
std::array<double, 5> closed_form_moments(const SystemEnsemble& ensemble, const ChipPulse& pulse);

// Marchenko-Pastur moment of the given order.
double mp_moment_oracle(double beta, int order);

}  // namespace acdma
