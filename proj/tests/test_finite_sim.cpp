#include <cmath>
#include <cstring>

#include "acdma/detector.hpp"
#include "acdma/finite_sim.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acdma;

namespace {

FiniteSystemConfig small_async(int N, int K, const ChipPulse& p, std::uint64_t seed) {
  FiniteSystemConfig c;
  c.N = N;
  c.K = K;
  c.pulse = p;
  c.window = 9;
  c.delays.kind = DelayKind::Uniform;
  c.powers.atoms = {{0.5, 0.0, 0.5}, {2.0, 0.0, 0.5}};
  c.n0 = 0.1;
  c.seed = seed;
  return c;
}

bool same_bytes(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(cdouble) * a.size()) == 0;
}

}  // namespace

TEST_CASE("circulant of a flat spectrum is the identity") {
  const auto p = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  const auto C = build_circulant(p, 1, 16, 0.0);
  CHECK((C - Eigen::MatrixXcd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("circulant block rows are circular shifts") {
  const auto p = ChipPulse::root_raised_cosine(0.4, 1.0, FrontEnd::type_a(3));
  const int N = 12, r = 3;
  const auto C = build_circulant(p, r, N, 0.37);
  for (int b = 1; b < N; ++b)
    for (int t = 0; t < r; ++t)
      for (int i = 0; i < N; ++i) CHECK(C(b * r + t, (i + 1) % N) == C((b - 1) * r + t, i));
}

TEST_CASE("circulant rows are inverse DFTs of the folded transform") {
  const auto p = ChipPulse::sinc(1.5, 1.0, FrontEnd::type_a(2));
  const int N = 16, r = 2;
  const double tau = 0.3;
  const auto C = build_circulant(p, r, N, tau);
  for (int t = 0; t < r; ++t) {
    for (int n = 0; n < N; ++n) {
      cdouble c = 0.0;
      for (int q = 0; q < N; ++q)
        c += folded_transform(p, 2 * oracle::pi * q / N, tau - t * 0.5) * std::polar(1.0, 2 * oracle::pi * q * n / N);
      c /= N;
      CHECK(std::abs(C(t, n) - c) < 1e-13);
    }
  }
}

TEST_CASE("circulant entries are periodized chip samples") {
  // Chip-matched root-raised-cosine: the sampled chip is the raised cosine.
  const auto p = ChipPulse::root_raised_cosine(0.5, 1.0, FrontEnd::type_b());
  const int N = 16;
  const double tau = 0.3;
  const auto C = build_circulant(p, 1, N, tau);
  for (int n = 0; n < N; ++n) {
    double acc = 0.0;
    for (int j = -400; j <= 400; ++j) acc += oracle::rc_pulse(0.5, n + j * N + tau);
    CHECK(std::abs(C(0, n) - acc) < 1e-9);
  }
}

TEST_CASE("FFT spreading equals the circulant product") {
  const auto p = ChipPulse::sinc(1.5, 1.0, FrontEnd::type_a(2));
  const int N = 20, r = 2;
  const double delay = 7.42;
  const VirtualSpreading vs(p, N, delay);
  CHECK(vs.chip_delay() == 7);
  CHECK(vs.sub_chip_delay() == doctest::Approx(0.42));
  Eigen::VectorXcd s = Eigen::VectorXcd::Random(N);
  const Eigen::VectorXcd v = vs.apply(s);
  Eigen::VectorXcd expect = Eigen::VectorXcd::Zero(2 * r * N);
  expect.segment(r * 7, r * N) = build_circulant(p, r, N, vs.sub_chip_delay()) * s;
  CHECK((v - expect).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("synchronous Nyquist system is block diagonal") {
  FiniteSystemConfig c;
  c.N = 16;
  c.K = 8;
  c.window = 5;
  c.delays.kind = DelayKind::Synchronous;
  const auto s = build_system(c);
  for (int m = 0; m < c.window; ++m) CHECK(s.Hd[m].isZero(0.0));
  const Eigen::MatrixXcd H = s.dense_H();
  const Eigen::MatrixXcd R = H.adjoint() * H;
  for (int i = 0; i < c.window; ++i)
    for (int j = 0; j < c.window; ++j)
      if (i != j) CHECK(R.block(i * c.K, j * c.K, c.K, c.K).isZero(0.0));
  // Spreading blocks differ between symbols.
  CHECK((s.Hu[1] - s.Hu[2]).norm() > 0.1);
}

TEST_CASE("banded products equal dense matrix powers") {
  const auto p = ChipPulse::root_raised_cosine(0.5, 1.0, FrontEnd::type_a(2));
  auto c = small_async(16, 10, p, 7);
  c.window = 7;
  const auto s = build_system(c);
  const Eigen::MatrixXcd H = s.dense_H();
  const Eigen::MatrixXcd R = H.adjoint() * H;
  const int m = s.center();
  const auto diag = empirical_diag_moments(s, 6, m);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(R.rows(), R.cols());
  for (int ell = 1; ell <= 6; ++ell) {
    P = P * R;
    for (int k = 0; k < c.K; ++k) {
      const double ref = P(m * c.K + k, m * c.K + k).real();
      CHECK(std::abs(diag(k, ell - 1) - ref) < 1e-12 * ref);
      CHECK(std::abs(empirical_diag_moment(s, ell, k, m) - ref) < 1e-12 * ref);
    }
  }
  CHECK(std::abs(empirical_diag_moment(s, 1, 3, m) - s.column(3, m).squaredNorm()) < 1e-14);

  const Eigen::MatrixXcd x = Eigen::MatrixXcd::Random(H.cols(), 2);
  const Eigen::MatrixXcd y = Eigen::MatrixXcd::Random(H.rows(), 2);
  CHECK((s.apply_H(x) - H * x).norm() < 1e-12 * (H * x).norm());
  CHECK((s.apply_HH(y) - H.adjoint() * y).norm() < 1e-12 * (H.adjoint() * y).norm());

  Eigen::VectorXd w(3);
  w << 0.7, -0.2, 0.05;
  const Eigen::MatrixXcd T = H * H.adjoint();
  const auto F = detector_filters(s, w, {2, 5}, m);
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXcd h = s.column(j == 0 ? 2 : 5, m);
    const Eigen::VectorXcd f = w(0) * h + w(1) * (T * h) + w(2) * (T * (T * h));
    CHECK((F.col(j) - f).norm() < 1e-12 * f.norm());
  }

  CHECK_THROWS_AS(empirical_diag_moments(s, 2, 1), SimulationError);
  CHECK_THROWS_AS(empirical_diag_moment(s, 0, 0, m), SimulationError);
}

TEST_CASE("systems are deterministic per seed") {
  const auto p = ChipPulse::sinc(1.5, 1.0, FrontEnd::type_a(2));
  const auto a = build_system(small_async(16, 6, p, 11));
  const auto b = build_system(small_async(16, 6, p, 11));
  const auto d = build_system(small_async(16, 6, p, 12));
  CHECK(a.delays == b.delays);
  for (int m = 0; m < a.window; ++m) {
    CHECK(same_bytes(a.Hu[m], b.Hu[m]));
    CHECK(same_bytes(a.Hd[m], b.Hd[m]));
  }
  CHECK((a.Hu[4] - d.Hu[4]).norm() > 0.1);
  CHECK(a.delays != d.delays);

  // The central draws do not depend on the window length.
  auto c5 = small_async(16, 6, p, 11);
  c5.window = 5;
  const auto e = build_system(c5);
  CHECK(same_bytes(e.Hu[2], a.Hu[4]));
  CHECK(same_bytes(e.Hd[3], a.Hd[5]));
}

TEST_CASE("configuration checks") {
  FiniteSystemConfig c;
  c.window = 4;
  CHECK_THROWS_AS(build_system(c), std::invalid_argument);
  c = FiniteSystemConfig{};
  c.delays.kind = DelayKind::Fixed;
  c.delays.values.assign(c.K, 1.0);
  CHECK_THROWS_AS(build_system(c), std::invalid_argument);
  c.delays.values[0] = 0.0;
  c.delays.values[3] = 0.5;
  CHECK_THROWS_AS(build_system(c), std::invalid_argument);
  c = FiniteSystemConfig{};
  c.memory_cap = 1 << 20;
  CHECK_THROWS_AS(build_system(c), SimulationError);
  c = FiniteSystemConfig{};
  c.pulse = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  CHECK_THROWS_AS(frontend_b_system(c), std::invalid_argument);
}

TEST_CASE("power assignment follows the atoms") {
  auto c = small_async(16, 10, ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1)), 3);
  const auto s = build_system(c);
  int low = 0;
  for (int k = 0; k < c.K; ++k) {
    CHECK((s.power(k) == doctest::Approx(0.5) || s.power(k) == doctest::Approx(2.0)));
    low += s.power(k) < 1.0;
  }
  CHECK(low == 5);
  CHECK(s.delays[0] == 0.0);
  for (int k = 1; k < c.K; ++k) CHECK(s.delays[k] >= s.delays[k - 1]);
}

TEST_CASE("single-user norm statistics") {
  const auto p = ChipPulse::root_raised_cosine(0.5, 1.0, FrontEnd::type_a(2));
  const double expect = 2.0 * energy_coefficient(p, 1).value / 1.0;
  double acc = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    FiniteSystemConfig c;
    c.N = 64;
    c.K = 1;
    c.pulse = p;
    c.seed = seed;
    c.delays.kind = DelayKind::Synchronous;
    const auto s = build_system(c);
    for (int m = 0; m < c.window; ++m, ++n) acc += s.column(0, m).squaredNorm();
  }
  CHECK(std::abs(acc / n - expect) < 0.03 * expect);
}

TEST_CASE("synchronous second moment is 1 + beta") {
  FiniteSystemConfig c;
  c.N = 512;
  c.K = 256;
  c.window = 3;
  c.delays.kind = DelayKind::Synchronous;
  c.seed = 5;
  const auto s = build_system(c);
  const auto d = empirical_diag_moments(s, 2, s.center());
  CHECK(std::abs(d.col(1).mean() - 1.5) < 0.02 * 1.5);
}

TEST_CASE("interference-free matched filter has unbounded SINR") {
  FiniteSystemConfig c;
  c.N = 16;
  c.K = 1;
  c.n0 = 0.0;
  const auto s = build_system(c);
  Eigen::VectorXd w(1);
  w << 1.0;
  CHECK(signal_level_sinr(s, w, 0, 0.0, 50, 1) == kInfiniteSinr);
}

TEST_CASE("matched filter over a fresh-system ensemble") {
  FiniteSystemConfig c;
  c.N = 128;
  c.K = 64;
  c.window = 3;
  c.delays.kind = DelayKind::Synchronous;
  c.n0 = 0.1;
  c.seed = 42;
  Eigen::VectorXd w(1);
  w << 1.0;
  EnsembleSinrOptions o;
  o.trials = 2000;
  o.users = {};
  const auto est = ensemble_signal_level_sinr(c, w, o);
  const double expect = 1.0 / (0.5 + 0.1);
  CHECK(std::abs(est.sinr - expect) < 0.05 * expect);
  CHECK(est.ci_low < est.sinr);
  CHECK(est.ci_high > est.sinr);
}

TEST_CASE("window truncation converges") {
  const auto p = ChipPulse::sinc(1.5, 1.0, FrontEnd::type_a(2));
  Eigen::VectorXd w(3);
  w << 1.0, -0.3, 0.04;
  double prev_gap = 0.0;
  double prev = 0.0;
  for (int M : {5, 7, 9}) {
    auto c = small_async(32, 16, p, 9);
    c.window = M;
    const auto s = build_system(c);
    const double v = signal_level_sinr(s, w, 0, s.noise_variance, 400, 3);
    if (M > 5) {
      const double gap = std::abs(v - prev);
      if (M > 7) CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
    prev = v;
  }
}

TEST_CASE("front end B: zero roll-off equals front end A at chip rate") {
  auto cb = small_async(32, 12, ChipPulse::root_raised_cosine(0.0, 1.0, FrontEnd::type_b()), 4);
  auto ca = cb;
  ca.pulse = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  const auto sb = frontend_b_system(cb);
  const auto sa = build_system(ca);
  for (int m = 0; m < sa.window; ++m) {
    CHECK((sa.Hu[m] - sb.Hu[m]).norm() < 1e-12 * sa.Hu[m].norm());
    CHECK((sa.Hd[m] - sb.Hd[m]).norm() < 1e-12 * std::max(1.0, sa.Hd[m].norm()));
  }
  CHECK(sa.noise_variance == sb.noise_variance);
}

TEST_CASE("front end B: the aligned sampling phase maximizes the user's energy") {
  const auto p = ChipPulse::root_raised_cosine(0.5, 1.0, FrontEnd::type_b());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = small_async(32, 16, p, 100 + seed);
    c.window = 3;
    const int k = 5;
    const double tau = build_system(c).delays[k];
    double best = -1.0;
    int arg = -1;
    for (int j = 0; j < 8; ++j) {
      c.sampling_phase = std::fmod(tau + j / 8.0, 1.0);
      const auto s = frontend_b_system(c);
      const double v = empirical_diag_moment(s, 1, k, s.center());
      if (v > best) {
        best = v;
        arg = j;
      }
    }
    CHECK(arg == 0);
  }
}
