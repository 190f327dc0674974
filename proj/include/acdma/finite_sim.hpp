#pragma once

// Finite-(N, K) random-spreading systems used as a Monte Carlo reference for
// the large-system moments and SINR.
//
// Sample layout: symbol interval m holds rN samples. User k with delay
// tau_k = taubar_k T_c + taufrac_k contributes Phi_k s_k^(m) (2rN samples)
// starting at sample m rN, where Phi_k stacks r taubar_k zero rows, the
// r-block-wise circulant of taufrac_k and r (N - taubar_k) zero rows. The
// upper rN rows of the amplitude-scaled column form H_u^(m), the lower rN
// rows H_d^(m), so that y_m = H_u^(m) b_m + H_d^(m-1) b_{m-1} + n_m.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "acdma/moments.hpp"
#include "acdma/pulse.hpp"

namespace acdma {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SplitMix64 step; used to derive independent stream seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);
// Seed for the stream identified by (master, stream, a, b).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::int64_t a = 0,
                          std::int64_t b = 0);

enum class DelayKind {
  Uniform,      // tau_1 = 0, others uniform on [0, T_s), sorted
  Fixed,        // per-user list in seconds, sorted, first entry 0
  Synchronous,  // all zero
};

struct DelaySpec {
  DelayKind kind = DelayKind::Uniform;
  std::vector<double> values;
};

// Received powers |a_k|^2: a per-user list, or (power, prob) atoms assigned to
// consecutive users in proportion to prob.
struct PowerSpec {
  std::vector<double> per_user;
  std::vector<PowerDelayAtom> atoms{PowerDelayAtom{}};
};

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{2} << 30;

struct FiniteSystemConfig {
  int N = 64;
  int K = 32;
  ChipPulse pulse = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  int window = 9;  // odd; statistics come from the central symbol
  DelaySpec delays;
  PowerSpec powers;
  double n0 = 0.1;
  std::uint64_t seed = 1;
  // Front end B: the sampling instants are shifted by this amount (seconds),
  // which subtracts it from every user's delay modulo T_s.
  double sampling_phase = 0.0;
  std::size_t memory_cap = kDefaultMemoryCap;

  int oversampling() const { return pulse.oversampling(); }
  void validate() const;
};

// rN x N r-block-wise circulant; row b r + t, column i holds c_t[(i - b) mod N]
// with c_t the N-point inverse DFT of phi(2 pi n / N, tau - t T_c / r).
Eigen::MatrixXcd build_circulant(const ChipPulse& pulse, int r, int N, double tau_frac);

// Phi_k applied to a spreading sequence through the FFT: the r-block-wise
// circulant of the sub-chip delay, placed r * taubar rows down in 2rN rows.
class VirtualSpreading {
 public:
  VirtualSpreading(const ChipPulse& pulse, int N, double delay);

  int chip_delay() const { return tbar_; }
  double sub_chip_delay() const { return tfrac_; }
  // 2rN samples of Phi_k s.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& s) const;

 private:
  int r_ = 1;
  int N_ = 0;
  int tbar_ = 0;
  double tfrac_ = 0.0;
  std::vector<std::vector<cdouble>> phi_;  // phi(-2 pi q / N, tfrac - t T_c / r)
};

struct FiniteSystem {
  int N = 0;
  int K = 0;
  int r = 1;
  int window = 0;
  double chip_interval = 1.0;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;

  std::vector<double> delays;      // tau_k in seconds, in [0, T_s)
  std::vector<double> amplitudes;  // a_k
  std::vector<Eigen::MatrixXcd> Hu;  // per symbol, rN x K, amplitudes included
  std::vector<Eigen::MatrixXcd> Hd;

  int center() const { return window / 2; }
  int block_rows() const { return r * N; }
  double power(int k) const { return amplitudes[k] * amplitudes[k]; }

  // Virtual spreading S^(m) = [Hu; Hd] A^{-1}, 2rN x K.
  Eigen::MatrixXcd spreading(int m) const;
  // h_k^(m) as a column of the stacked window matrix.
  Eigen::VectorXcd column(int k, int m) const;
  // Stacked (M rN) x (M K) window matrix. Throws above memory_cap bytes.
  Eigen::MatrixXcd dense_H(std::size_t memory_cap = kDefaultMemoryCap) const;
  // y = H x and x = H^H y on stacked vectors.
  Eigen::MatrixXcd apply_H(const Eigen::MatrixXcd& x) const;
  Eigen::MatrixXcd apply_HH(const Eigen::MatrixXcd& y) const;
};

FiniteSystem build_system(const FiniteSystemConfig& config);

// Front end B with the configured sampling phase; requires a root-raised-cosine chip.
FiniteSystem frontend_b_system(const FiniteSystemConfig& config);

// (R^ell)_{(k,m),(k,m)} = h^H T^{ell-1} h for one user.
double empirical_diag_moment(const FiniteSystem& system, int ell, int k, int m);

// Rows: users; column ell-1: (R^ell)_kk for ell = 1..max_ell, all users of symbol m.
Eigen::MatrixXd empirical_diag_moments(const FiniteSystem& system, int max_ell, int m);

// Stacked filters f_k = sum_l w_l T^{l-1} h_k for the given users of symbol m,
// so that the detector output is f_k^H y.
Eigen::MatrixXcd detector_filters(const FiniteSystem& system, const Eigen::VectorXd& weights,
                                  const std::vector<int>& users, int m);

inline constexpr double kInfiniteSinr = std::numeric_limits<double>::infinity();

// Empirical |E b_hat b*|^2 / var(b_hat - c b) for user k of the central
// symbol, over trials of QPSK symbols and complex Gaussian noise of variance
// sigma^2 per sample. Returns kInfiniteSinr when the error power vanishes.
double signal_level_sinr(const FiniteSystem& system, const Eigen::VectorXd& weights, int k,
                         double noise_variance, int trials, std::uint64_t seed);

struct SinrEstimate {
  double sinr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long samples = 0;
};

struct EnsembleSinrOptions {
  int trials = 2000;
  // Users of the central symbol whose outputs are pooled; empty means all.
  std::vector<int> users{0};
  int batches = 20;  // batch-means confidence interval
  int jobs = 1;
};

// Same estimator with a fresh system per trial (seed derived from the
// config seed and the trial index).
SinrEstimate ensemble_signal_level_sinr(const FiniteSystemConfig& config,
                                        const Eigen::VectorXd& weights,
                                        const EnsembleSinrOptions& opts = {});

}  // namespace acdma
