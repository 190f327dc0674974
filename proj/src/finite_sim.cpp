#include "acdma/finite_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <variant>

#include <fmt/format.h>
#include <unsupported/Eigen/FFT>

#include "acdma/parallel.hpp"

namespace acdma {

namespace {

constexpr double kPi = std::numbers::pi;

enum Stream : std::uint64_t {
  kDelays = 1,
  kSpreading = 2,
  kSymbols = 3,
  kNoise = 4,
  kTrialSystem = 5,
};

// Circular complex Gaussian with E|z|^2 = variance.
cdouble complex_normal(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * variance));
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

cdouble qpsk(std::mt19937_64& rng) {
  static constexpr double h = 0.70710678118654752440;
  const auto bits = rng();
  return {(bits & 1u) ? h : -h, (bits & 2u) ? h : -h};
}

// Per-symbol blocks of a stacked vector or matrix; only lo..hi are non-zero.
struct Blocks {
  int lo = 0;
  int hi = -1;
  std::vector<Eigen::MatrixXcd> b;

  bool empty() const { return hi < lo; }
};

Blocks mul_H(const FiniteSystem& s, const Blocks& x) {
  Blocks y;
  y.b.resize(s.window);
  y.lo = x.lo;
  y.hi = std::min(x.hi + 1, s.window - 1);
  const auto cols = x.b[x.lo].cols();
  for (int i = y.lo; i <= y.hi; ++i) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(s.block_rows(), cols);
    if (i <= x.hi) acc.noalias() += s.Hu[i] * x.b[i];
    if (i - 1 >= x.lo) acc.noalias() += s.Hd[i - 1] * x.b[i - 1];
    y.b[i] = std::move(acc);
  }
  return y;
}

Blocks mul_HH(const FiniteSystem& s, const Blocks& y) {
  Blocks x;
  x.b.resize(s.window);
  x.lo = std::max(y.lo - 1, 0);
  x.hi = y.hi;
  const auto cols = y.b[y.lo].cols();
  for (int i = x.lo; i <= x.hi; ++i) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(s.K, cols);
    if (i >= y.lo) acc.noalias() += s.Hu[i].adjoint() * y.b[i];
    if (i + 1 <= y.hi) acc.noalias() += s.Hd[i].adjoint() * y.b[i + 1];
    x.b[i] = std::move(acc);
  }
  return x;
}

Eigen::VectorXd column_norms2(const Blocks& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.b[v.lo].cols());
  for (int i = v.lo; i <= v.hi; ++i) out += v.b[i].colwise().squaredNorm().transpose();
  return out;
}

void check_symbol(const FiniteSystem& s, int m) {
  const int lo = s.window / 3;
  const int hi = s.window - 1 - s.window / 3;
  if (m < lo || m > hi)
    throw SimulationError(fmt::format("symbol {} is outside the central third [{}, {}] of a {}-symbol window",
                                      m, lo, hi, s.window));
}

Blocks first_columns(const FiniteSystem& s, const std::vector<int>& users, int m) {
  Blocks y;
  y.b.resize(s.window);
  y.lo = m;
  y.hi = std::min(m + 1, s.window - 1);
  const auto n = static_cast<Eigen::Index>(users.size());
  y.b[m].resize(s.block_rows(), n);
  if (y.hi > m) y.b[m + 1].resize(s.block_rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int k = users[j];
    if (k < 0 || k >= s.K) throw SimulationError(fmt::format("user {} out of range", k));
    y.b[m].col(j) = s.Hu[m].col(k);
    if (y.hi > m) y.b[m + 1].col(j) = s.Hd[m].col(k);
  }
  return y;
}

std::vector<double> draw_delays(const FiniteSystemConfig& c) {
  const double ts = c.N * c.pulse.chip_interval();
  std::vector<double> tau(c.K, 0.0);
  switch (c.delays.kind) {
    case DelayKind::Synchronous:
      break;
    case DelayKind::Fixed:
      tau = c.delays.values;
      break;
    case DelayKind::Uniform: {
      std::mt19937_64 rng(derive_seed(c.seed, kDelays));
      std::uniform_real_distribution<double> u(0.0, ts);
      for (int k = 1; k < c.K; ++k) tau[k] = u(rng);
      std::sort(tau.begin() + 1, tau.end());
      break;
    }
  }
  return tau;
}

std::vector<double> assign_powers(const FiniteSystemConfig& c) {
  if (!c.powers.per_user.empty()) return c.powers.per_user;
  std::vector<double> p(c.K, 0.0);
  double cum = 0.0;
  int start = 0;
  for (std::size_t j = 0; j < c.powers.atoms.size(); ++j) {
    cum += c.powers.atoms[j].prob;
    const int end = j + 1 == c.powers.atoms.size()
                        ? c.K
                        : std::min(c.K, static_cast<int>(std::lround(cum * c.K)));
    for (int k = start; k < end; ++k) p[k] = c.powers.atoms[j].power;
    start = std::max(start, end);
  }
  return p;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::int64_t a, std::int64_t b) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ static_cast<std::uint64_t>(a));
  return splitmix64(h ^ static_cast<std::uint64_t>(b));
}

void FiniteSystemConfig::validate() const {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (N < 2) throw std::invalid_argument("N must be at least 2");
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("window must be odd and at least 3");
  if (!(n0 >= 0.0)) throw std::invalid_argument("n0 must be non-negative");
  const double tc = pulse.chip_interval();
  const double ts = N * tc;
  if (delays.kind == DelayKind::Fixed) {
    if (static_cast<int>(delays.values.size()) != K)
      throw std::invalid_argument(fmt::format("delays: {} values for {} users", delays.values.size(), K));
    if (delays.values.front() != 0.0) throw std::invalid_argument("delays: the first user must have delay 0");
    for (int k = 0; k < K; ++k) {
      const double t = delays.values[k];
      if (!(t >= 0.0 && t < ts)) throw std::invalid_argument(fmt::format("delays: tau[{}] = {} outside [0, T_s)", k, t));
      if (k > 0 && t < delays.values[k - 1]) throw std::invalid_argument("delays must be sorted ascending");
    }
  }
  if (!powers.per_user.empty()) {
    if (static_cast<int>(powers.per_user.size()) != K)
      throw std::invalid_argument(fmt::format("powers: {} values for {} users", powers.per_user.size(), K));
    for (double p : powers.per_user)
      if (!(p >= 0.0 && std::isfinite(p))) throw std::invalid_argument("powers must be finite and non-negative");
  } else {
    if (powers.atoms.empty()) throw std::invalid_argument("powers: no atoms");
    double sum = 0.0;
    for (const auto& a : powers.atoms) {
      if (!(a.power >= 0.0 && std::isfinite(a.power) && a.prob >= 0.0))
        throw std::invalid_argument("power atoms must be finite and non-negative");
      sum += a.prob;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("power atom probabilities must sum to 1");
  }
  if (!(sampling_phase >= 0.0 && sampling_phase < ts))
    throw std::invalid_argument("sampling_phase must lie in [0, T_s)");
  const double r = oversampling();
  const double dense = static_cast<double>(window) * r * N * window * K * sizeof(cdouble);
  if (dense > static_cast<double>(memory_cap))
    throw SimulationError(fmt::format("window matrix needs {:.3g} GiB, above the {:.3g} GiB cap",
                                      dense / (1u << 30), static_cast<double>(memory_cap) / (1u << 30)));
}

Eigen::MatrixXcd build_circulant(const ChipPulse& pulse, int r, int N, double tau_frac) {
  const double tc = pulse.chip_interval();
  Eigen::FFT<double> fft;
  Eigen::MatrixXcd C(r * N, N);
  std::vector<cdouble> spec(N), c;
  for (int t = 0; t < r; ++t) {
    for (int n = 0; n < N; ++n) spec[n] = folded_transform(pulse, 2.0 * kPi * n / N, tau_frac - t * tc / r);
    fft.inv(c, spec);
    for (int b = 0; b < N; ++b)
      for (int i = 0; i < N; ++i) C(b * r + t, i) = c[((i - b) % N + N) % N];
  }
  return C;
}

VirtualSpreading::VirtualSpreading(const ChipPulse& pulse, int N, double delay)
    : r_(pulse.oversampling()), N_(N) {
  const double tc = pulse.chip_interval();
  tbar_ = static_cast<int>(std::floor(delay / tc));
  tfrac_ = delay - tbar_ * tc;
  if (tfrac_ >= tc) {
    tfrac_ = 0.0;
    ++tbar_;
  }
  if (tbar_ < 0 || tbar_ >= N) throw std::invalid_argument(fmt::format("delay {} outside [0, T_s)", delay));
  phi_.assign(r_, std::vector<cdouble>(N));
  for (int t = 0; t < r_; ++t)
    for (int q = 0; q < N; ++q) phi_[t][q] = folded_transform(pulse, -2.0 * kPi * q / N, tfrac_ - t * tc / r_);
}

Eigen::VectorXcd VirtualSpreading::apply(const Eigen::VectorXcd& s) const {
  // Row b r + t of the circulant times s is ifft(fft(s) phi_t)[b].
  Eigen::FFT<double> fft;
  std::vector<cdouble> in(s.data(), s.data() + N_), S, prod(N_), out;
  fft.fwd(S, in);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * r_ * N_);
  const int shift = r_ * tbar_;
  for (int t = 0; t < r_; ++t) {
    for (int q = 0; q < N_; ++q) prod[q] = S[q] * phi_[t][q];
    fft.inv(out, prod);
    for (int b = 0; b < N_; ++b) v[shift + b * r_ + t] = out[b];
  }
  return v;
}

Eigen::MatrixXcd FiniteSystem::spreading(int m) const {
  Eigen::MatrixXcd S(2 * block_rows(), K);
  S << Hu.at(m), Hd.at(m);
  for (int k = 0; k < K; ++k) S.col(k) /= amplitudes[k];
  return S;
}

Eigen::VectorXcd FiniteSystem::column(int k, int m) const {
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(window) * block_rows());
  h.segment(static_cast<Eigen::Index>(m) * block_rows(), block_rows()) = Hu.at(m).col(k);
  if (m + 1 < window) h.segment(static_cast<Eigen::Index>(m + 1) * block_rows(), block_rows()) = Hd.at(m).col(k);
  return h;
}

Eigen::MatrixXcd FiniteSystem::dense_H(std::size_t memory_cap) const {
  const double bytes = static_cast<double>(window) * block_rows() * window * K * sizeof(cdouble);
  if (bytes > static_cast<double>(memory_cap))
    throw SimulationError(fmt::format("dense window matrix needs {:.3g} GiB", bytes / (1u << 30)));
  const Eigen::Index R = block_rows();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(window * R, static_cast<Eigen::Index>(window) * K);
  for (int m = 0; m < window; ++m) {
    H.block(m * R, static_cast<Eigen::Index>(m) * K, R, K) = Hu[m];
    if (m + 1 < window) H.block((m + 1) * R, static_cast<Eigen::Index>(m) * K, R, K) = Hd[m];
  }
  return H;
}

Eigen::MatrixXcd FiniteSystem::apply_H(const Eigen::MatrixXcd& x) const {
  const Eigen::Index R = block_rows();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(window * R, x.cols());
  for (int m = 0; m < window; ++m) {
    y.middleRows(m * R, R).noalias() += Hu[m] * x.middleRows(static_cast<Eigen::Index>(m) * K, K);
    if (m + 1 < window)
      y.middleRows((m + 1) * R, R).noalias() += Hd[m] * x.middleRows(static_cast<Eigen::Index>(m) * K, K);
  }
  return y;
}

Eigen::MatrixXcd FiniteSystem::apply_HH(const Eigen::MatrixXcd& y) const {
  const Eigen::Index R = block_rows();
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(window) * K, y.cols());
  for (int m = 0; m < window; ++m) {
    x.middleRows(static_cast<Eigen::Index>(m) * K, K).noalias() += Hu[m].adjoint() * y.middleRows(m * R, R);
    if (m + 1 < window)
      x.middleRows(static_cast<Eigen::Index>(m) * K, K).noalias() +=
          Hd[m].adjoint() * y.middleRows((m + 1) * R, R);
  }
  return x;
}

FiniteSystem build_system(const FiniteSystemConfig& config) {
  config.validate();
  const auto& pulse = config.pulse;
  const int N = config.N;
  const int K = config.K;
  const int r = config.oversampling();
  const int M = config.window;
  const double tc = pulse.chip_interval();
  const double ts = N * tc;

  FiniteSystem s;
  s.N = N;
  s.K = K;
  s.r = r;
  s.window = M;
  s.chip_interval = tc;
  s.noise_variance = noise_variance(config.n0, pulse);
  s.seed = config.seed;
  s.delays = draw_delays(config);
  const auto powers = assign_powers(config);
  s.amplitudes.resize(K);
  for (int k = 0; k < K; ++k) s.amplitudes[k] = std::sqrt(powers[k]);

  const int R = r * N;
  s.Hu.assign(M, Eigen::MatrixXcd::Zero(R, K));
  s.Hd.assign(M, Eigen::MatrixXcd::Zero(R, K));

  Eigen::VectorXcd spread(N);
  for (int k = 0; k < K; ++k) {
    double tau = s.delays[k] - config.sampling_phase;
    if (tau < 0.0) tau += ts;
    const VirtualSpreading phi(pulse, N, tau);
    for (int m = 0; m < M; ++m) {
      std::mt19937_64 rng(derive_seed(config.seed, kSpreading, k, m - M / 2));
      for (auto& x : spread) x = complex_normal(rng, 1.0 / N);
      const Eigen::VectorXcd v = s.amplitudes[k] * phi.apply(spread);
      s.Hu[m].col(k) = v.head(R);
      s.Hd[m].col(k) = v.tail(R);
    }
  }
  return s;
}

FiniteSystem frontend_b_system(const FiniteSystemConfig& config) {
  if (config.pulse.is_type_a())
    throw std::invalid_argument("frontend_b_system needs a chip-matched (type B) front end");
  if (!std::holds_alternative<RootRaisedCosineShape>(config.pulse.shape()))
    throw std::invalid_argument("frontend_b_system needs a root-raised-cosine chip");
  return build_system(config);
}

Eigen::MatrixXd empirical_diag_moments(const FiniteSystem& system, int max_ell, int m) {
  if (max_ell < 1) throw SimulationError("ell must be at least 1");
  check_symbol(system, m);
  std::vector<int> users(system.K);
  for (int k = 0; k < system.K; ++k) users[k] = k;
  Eigen::MatrixXd out(system.K, max_ell);
  Blocks y = first_columns(system, users, m);
  Blocks x;
  for (int ell = 1; ell <= max_ell; ++ell) {
    if (ell % 2 == 1) {
      if (ell > 1) y = mul_H(system, x);
      out.col(ell - 1) = column_norms2(y);
    } else {
      x = mul_HH(system, y);
      out.col(ell - 1) = column_norms2(x);
    }
  }
  return out;
}

double empirical_diag_moment(const FiniteSystem& system, int ell, int k, int m) {
  if (ell < 1) throw SimulationError("ell must be at least 1");
  check_symbol(system, m);
  // h^H T^{ell-1} h = ||T^{(ell-1)/2} h||^2 or ||H^H T^{(ell-2)/2} h||^2.
  Blocks y = first_columns(system, {k}, m);
  for (int i = 0; i < (ell - 1) / 2; ++i) y = mul_H(system, mul_HH(system, y));
  if (ell % 2 == 1) return column_norms2(y)(0);
  return column_norms2(mul_HH(system, y))(0);
}

Eigen::MatrixXcd detector_filters(const FiniteSystem& system, const Eigen::VectorXd& weights,
                                  const std::vector<int>& users, int m) {
  if (weights.size() < 1) throw SimulationError("empty weight vector");
  check_symbol(system, m);
  const Eigen::Index R = system.block_rows();
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(system.window * R, static_cast<Eigen::Index>(users.size()));
  Blocks y = first_columns(system, users, m);
  for (Eigen::Index l = 0; l < weights.size(); ++l) {
    if (l > 0) y = mul_H(system, mul_HH(system, y));
    for (int i = y.lo; i <= y.hi; ++i) F.middleRows(i * R, R) += weights(l) * y.b[i];
  }
  return F;
}

namespace {

// Detector outputs and transmitted symbols of one trial for the given users.
void run_trial(const FiniteSystem& s, const Eigen::MatrixXcd& F, const std::vector<int>& users, int m,
               double sigma2, std::uint64_t seed, std::int64_t trial, std::vector<cdouble>& bhat,
               std::vector<cdouble>& b) {
  const Eigen::Index R = s.block_rows();
  const int M = s.window;
  Eigen::MatrixXcd symbols(s.K, M);
  for (int j = 0; j < M; ++j) {
    std::mt19937_64 rng(derive_seed(seed, kSymbols, trial, j - M / 2));
    for (int k = 0; k < s.K; ++k) symbols(k, j) = qpsk(rng);
  }
  // Rows the filters touch.
  int lo = M, hi = -1;
  for (int i = 0; i < M; ++i) {
    if (!F.middleRows(i * R, R).isZero(0.0)) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(F.cols());
  Eigen::VectorXcd y(R);
  for (int i = lo; i <= hi; ++i) {
    std::mt19937_64 rng(derive_seed(seed, kNoise, trial, i - M / 2));
    for (Eigen::Index n = 0; n < R; ++n) y(n) = sigma2 > 0.0 ? complex_normal(rng, sigma2) : cdouble{};
    y.noalias() += s.Hu[i] * symbols.col(i);
    if (i > 0) y.noalias() += s.Hd[i - 1] * symbols.col(i - 1);
    acc.noalias() += F.middleRows(i * R, R).adjoint() * y;
  }
  for (std::size_t j = 0; j < users.size(); ++j) {
    bhat.push_back(acc(static_cast<Eigen::Index>(j)));
    b.push_back(symbols(users[j], m));
  }
}

double pooled_sinr(const cdouble* bhat, const cdouble* b, std::size_t n) {
  cdouble c = 0.0;
  for (std::size_t i = 0; i < n; ++i) c += bhat[i] * std::conj(b[i]);
  c /= static_cast<double>(n);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) err += std::norm(bhat[i] - c * b[i]);
  err /= static_cast<double>(n);
  const double sig = std::norm(c);
  if (err <= 1e-24 * sig) return kInfiniteSinr;
  return sig / err;
}

}  // namespace

double signal_level_sinr(const FiniteSystem& system, const Eigen::VectorXd& weights, int k,
                         double noise_variance, int trials, std::uint64_t seed) {
  if (trials < 1) throw SimulationError("trials must be at least 1");
  const int m = system.center();
  const std::vector<int> users{k};
  const Eigen::MatrixXcd F = detector_filters(system, weights, users, m);
  std::vector<cdouble> bhat, b;
  bhat.reserve(trials);
  b.reserve(trials);
  for (int t = 0; t < trials; ++t) run_trial(system, F, users, m, noise_variance, seed, t, bhat, b);
  return pooled_sinr(bhat.data(), b.data(), bhat.size());
}

SinrEstimate ensemble_signal_level_sinr(const FiniteSystemConfig& config, const Eigen::VectorXd& weights,
                                        const EnsembleSinrOptions& opts) {
  if (opts.trials < 1) throw SimulationError("trials must be at least 1");
  if (opts.batches < 2 || opts.batches > opts.trials)
    throw SimulationError("batches must lie in [2, trials]");
  config.validate();
  std::vector<int> users = opts.users;
  if (users.empty())
    for (int k = 0; k < config.K; ++k) users.push_back(k);
  const std::size_t per = users.size();
  std::vector<cdouble> bhat(per * opts.trials), b(per * opts.trials);
  parallel_for(static_cast<std::size_t>(opts.trials), opts.jobs, [&](std::size_t t) {
    FiniteSystemConfig c = config;
    c.seed = derive_seed(config.seed, kTrialSystem, static_cast<std::int64_t>(t));
    const FiniteSystem s = build_system(c);
    const Eigen::MatrixXcd F = detector_filters(s, weights, users, s.center());
    std::vector<cdouble> bh, bb;
    run_trial(s, F, users, s.center(), s.noise_variance, c.seed, 0, bh, bb);
    std::copy(bh.begin(), bh.end(), bhat.begin() + t * per);
    std::copy(bb.begin(), bb.end(), b.begin() + t * per);
  });

  SinrEstimate est;
  est.samples = static_cast<long>(bhat.size());
  est.sinr = pooled_sinr(bhat.data(), b.data(), bhat.size());
  std::vector<double> batch;
  for (int j = 0; j < opts.batches; ++j) {
    const std::size_t t0 = static_cast<std::size_t>(j) * opts.trials / opts.batches;
    const std::size_t t1 = static_cast<std::size_t>(j + 1) * opts.trials / opts.batches;
    batch.push_back(pooled_sinr(bhat.data() + t0 * per, b.data() + t0 * per, (t1 - t0) * per));
  }
  double mean = 0.0;
  for (double v : batch) mean += v;
  mean /= batch.size();
  double var = 0.0;
  for (double v : batch) var += (v - mean) * (v - mean);
  var /= batch.size() - 1;
  const double half = 1.96 * std::sqrt(var / batch.size());
  est.ci_low = est.sinr - half;
  est.ci_high = est.sinr + half;
  return est;
}

}  // namespace acdma
