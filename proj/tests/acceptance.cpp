// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria. Usage: acceptance [config-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "acdma/detector.hpp"
#include "acdma/experiments.hpp"
#include "acdma/finite_sim.hpp"
#include "acdma/moments.hpp"
#include "config.hpp"

using namespace acdma;

namespace {

std::string g_configs = ACDMA_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Binomial-sum form of the Marchenko-Pastur moments, independent of the library.
double narayana(double beta, int l) {
  double acc = 0.0;
  for (int i = 0; i < l; ++i) {
    const double c1 = std::tgamma(l + 1.0) / (std::tgamma(i + 1.0) * std::tgamma(l - i + 1.0));
    const double c2 = std::tgamma(l + 1.0) / (std::tgamma(i + 2.0) * std::tgamma(l - i));
    acc += c1 * c2 * std::pow(beta, i) / l;
  }
  return acc;
}

double wiener(const MomentTable& t, std::size_t cls, double sigma2, int L) {
  const auto in = build_moment_inputs(t, cls, sigma2, L);
  return sinr_wiener(in.Xi, in.xi);
}

Outcome mp_reduction() {
  const auto p = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  double worst = 0.0;
  for (double beta : {0.25, 0.5, 1.0}) {
    const auto sync = SystemEnsemble::equal_power(beta, 0.1, false);
    const auto unif = SystemEnsemble::equal_power(beta, 0.1, true);
    const std::vector<MomentTable> tables{theorem1_recursion(sync, p, 6), corollary1_recursion(unif, p, 6),
                                          algorithm1(unif, p, 6).table, theorem2_recursion(sync, p, 6)};
    for (const auto& t : tables)
      for (int l = 1; l <= 6; ++l) worst = std::max(worst, std::abs(t.eig_moments[l] - narayana(beta, l)));
  }
  return {worst <= 1e-10, fmt::format("max abs error {:.2e} over 4 engines, beta in {{0.25, 0.5, 1}}", worst)};
}

Outcome closed_form() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::uniform_int_distribution<int> ur(1, 4);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double beta = u(rng);
    const int r = ur(rng);
    const double tc = u(rng);
    std::array<double, 5> e{}, pm{};
    for (auto& x : e) x = u(rng);
    for (auto& x : pm) x = u(rng);
    const auto poly = algorithm1_polynomials(beta, r, tc, e, pm, 5);
    const auto cf = closed_form_moments(beta, r, tc, e, pm);
    for (int l = 1; l <= 5; ++l) worst = std::max(worst, rel(substitute_monomials(poly.rho[l], pm), cf[l - 1]));
  }
  return {worst <= 1e-10, fmt::format("max rel error {:.2e} over 100 draws", worst)};
}

Outcome engine_equivalence() {
  double worst = 0.0;
  const std::vector<std::vector<PowerDelayAtom>> powers{
      {{1.0, 0.0, 1.0}},
      {{0.5, 0.1, 0.4}, {1.5, 0.6, 0.6}},
      {{0.25, 0.0, 0.2}, {1.0, 0.3, 0.5}, {4.0, 0.8, 0.3}},
  };
  std::vector<ChipPulse> pulses;
  for (double g : {1.0, 1.25, 1.5, 1.75, 2.0}) pulses.push_back(ChipPulse::sinc(g, 1.0, FrontEnd::type_a(2)));
  for (double a : {0.25, 0.5, 1.0}) pulses.push_back(ChipPulse::root_raised_cosine(a, 1.0, FrontEnd::type_a(2)));
  int cases = 0;
  for (const auto& p : pulses) {
    for (double beta : {0.25, 0.5, 1.0, 1.5}) {
      for (const auto& atoms : powers) {
        SystemEnsemble e = SystemEnsemble::equal_power(beta, 0.1, true);
        e.atoms = atoms;
        const auto t1 = theorem1_recursion(e, p, 8);
        const auto c1 = corollary1_recursion(e, p, 8);
        const auto a1 = algorithm1(e, p, 8).table;
        for (std::size_t c = 0; c < atoms.size(); ++c) {
          for (int l = 1; l <= 8; ++l) {
            worst = std::max(worst, rel(t1.R[c][l], c1.R[c][l]));
            worst = std::max(worst, rel(a1.R[c][l], c1.R[c][l]));
          }
        }
        ++cases;
      }
    }
  }
  const auto spec = config::load_moments(g_configs + "/moments_async.yaml");
  const double spread = engine_spread(run_moments(spec));
  worst = std::max(worst, spread);
  return {worst <= 1e-8, fmt::format("max rel spread {:.2e} over {} ensembles, ell <= 8", worst, cases)};
}

Outcome scaling_identities() {
  double a_err = 0.0, b_err = 0.0, c_err = 0.0;
  SystemEnsemble two = SystemEnsemble::equal_power(0.5, 0.1, true);
  two.atoms = {{0.5, 0.0, 0.4}, {1.5, 0.0, 0.6}};
  for (double g : {1.0, 1.5, 2.0}) {
    const auto t2 = corollary1_recursion(two, ChipPulse::sinc(g, 1.0, FrontEnd::type_a(2)), 8);
    const auto t4 = corollary1_recursion(two, ChipPulse::sinc(g, 1.0, FrontEnd::type_a(4)), 8);
    for (std::size_t c = 0; c < 2; ++c)
      for (int l = 1; l <= 8; ++l) a_err = std::max(a_err, rel(t4.R[c][l], std::ldexp(t2.R[c][l], l)));
  }
  const double n0 = 0.1;
  const auto nyq = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  for (double g : {1.25, 1.5, 2.0}) {
    for (double beta : {0.25, 0.5, 1.0}) {
      const auto pa = ChipPulse::sinc(g, 1.0, FrontEnd::type_a(2));
      const auto ea = SystemEnsemble::equal_power(beta, n0, true);
      const auto es = SystemEnsemble::equal_power(beta / g, n0, false);
      const auto ta = corollary1_recursion(ea, pa, 8);
      const auto ts = theorem2_recursion(es, nyq, 8);
      for (int L = 1; L <= 4; ++L)
        b_err = std::max(b_err, rel(wiener(ta, 0, noise_variance(ea, pa), L), wiener(ts, 0, noise_variance(es, nyq), L)));
    }
  }
  for (double g : {1.0, 1.5, 2.0}) {
    const auto p2 = ChipPulse::sinc(g, 1.0, FrontEnd::type_a(2));
    const auto p4 = ChipPulse::sinc(g, 1.0, FrontEnd::type_a(4));
    const auto t2 = corollary1_recursion(two, p2, 8);
    const auto t4 = corollary1_recursion(two, p4, 8);
    for (std::size_t c = 0; c < 2; ++c)
      for (int L = 1; L <= 4; ++L)
        c_err = std::max(c_err, rel(wiener(t4, c, noise_variance(two, p4), L), wiener(t2, c, noise_variance(two, p2), L)));
  }
  return {a_err <= 1e-10 && b_err <= 1e-8 && c_err <= 1e-8,
          fmt::format("(a) {:.2e}  (b) {:.2e}  (c) {:.2e}", a_err, b_err, c_err)};
}

Outcome montecarlo_concentration() {
  auto spec = config::load_montecarlo(g_configs + "/montecarlo_async.yaml");
  const auto small = run_montecarlo(spec);
  spec.system.N *= 2;
  spec.system.K *= 2;
  const auto large = run_montecarlo(spec);
  std::map<std::string, double> var_small, var_large;
  double worst = 0.0;
  double worst_seed = 0.0;
  for (const auto& r : small.rows) {
    if (r.seed < 0) {
      worst = std::max(worst, r.rel_error);
      var_small[r.quantity] = r.variance;
    } else {
      worst_seed = std::max(worst_seed, r.rel_error);
    }
  }
  for (const auto& r : large.rows)
    if (r.seed < 0) var_large[r.quantity] = r.variance;
  bool shrinks = !var_small.empty();
  std::string vars;
  for (const auto& [q, v] : var_small) {
    shrinks = shrinks && var_large.at(q) < v;
    vars += fmt::format(" {} {:.3g}->{:.3g}", q, v, var_large.at(q));
  }
  return {worst <= 0.03 && shrinks,
          fmt::format("pooled max rel error {:.2e} (single seed {:.2e}); variance N=512->1024:{}", worst,
                      worst_seed, vars)};
}

Outcome matched_filter() {
  FiniteSystemConfig c;
  c.N = 128;
  c.K = 64;
  c.window = 3;
  c.pulse = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  c.delays.kind = DelayKind::Synchronous;
  c.n0 = from_db(-10.0);
  c.seed = 2024;
  Eigen::VectorXd w(1);
  w << 1.0;
  EnsembleSinrOptions o;
  o.trials = 2000;
  o.users = {};  // every user of the central symbol
  const auto est = ensemble_signal_level_sinr(c, w, o);
  const double expect = 1.0 / (0.5 + c.n0);
  const double err = rel(est.sinr, expect);
  return {err <= 0.05, fmt::format("SINR {:.4f} vs {:.4f}, rel error {:.2e}, 95% CI [{:.4f}, {:.4f}]", est.sinr,
                                   expect, err, est.ci_low, est.ci_high)};
}

using CurveKey = std::pair<std::string, double>;  // curve name, secondary parameter

std::map<double, std::map<CurveKey, double>> by_value(const std::vector<SweepRow>& rows,
                                                      double SweepRow::*secondary) {
  std::map<double, std::map<CurveKey, double>> out;
  for (const auto& r : rows) {
    const auto name = fmt::format("{}/{}", to_string(r.curve.scenario), to_string(r.curve.pulse));
    out[r.value][{name, r.*secondary}] = to_db(r.sinr);
  }
  return out;
}

Outcome sweep_properties() {
  std::vector<std::string> failures;

  // Bandwidth sweep: ordering above the Nyquist bandwidth, equality at it.
  const auto f2 = by_value(run_sweep(config::load_sweep(g_configs + "/sweep_bandwidth.yaml")), &SweepRow::snr_db);
  double eq_gap = 0.0;
  double min_margin = INFINITY;
  for (const auto& [b, c] : f2) {
    const double as = c.at({"async-A/sinc", 10.0});
    const double ar = c.at({"async-A/rrc", 10.0});
    const double sy = std::max(c.at({"sync/sinc", 10.0}), c.at({"sync/rrc", 10.0}));
    if (b <= 0.5 + 1e-12) {
      for (const auto& [k, v] : c) eq_gap = std::max(eq_gap, std::abs(v - c.at({"sync/rrc", 10.0})));
    } else {
      min_margin = std::min({min_margin, as - ar, ar - sy});
      if (!(as > ar && ar > sy)) failures.push_back(fmt::format("bandwidth sweep ordering at B T_c = {}", b));
    }
  }
  if (eq_gap > 1e-8) failures.push_back(fmt::format("bandwidth sweep equality gap {:.2e} dB", eq_gap));

  // Load sweep: async-over-sync gap widens with the load.
  const auto f3 = by_value(run_sweep(config::load_sweep(g_configs + "/sweep_load.yaml")), &SweepRow::bandwidth);
  double min_step = INFINITY;
  for (double bw : {0.75, 1.0}) {
    for (const char* async : {"async-A/sinc", "async-A/rrc"}) {
      double prev = -INFINITY;
      for (const auto& [beta, c] : f3) {
        const double gap = c.at({async, bw}) - c.at({"sync/rrc", bw});
        min_step = std::min(min_step, gap - prev);
        if (!(gap > prev)) failures.push_back(fmt::format("load sweep {} B T_c = {} gap not widening at load {}", async, bw, beta));
        prev = gap;
      }
    }
  }

  // Roll-off sweep: front end B close to sync; front end A above both.
  const auto f4 = by_value(run_sweep(config::load_sweep(g_configs + "/sweep_rolloff.yaml")), &SweepRow::snr_db);
  double worst_b = 0.0;
  std::string worst_at;
  int b_misses = 0;
  for (const auto& [theta, c] : f4) {
    for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
      const double s = c.at({"sync/rrc", snr});
      const double a = c.at({"async-A/rrc", snr});
      const double b = c.at({"async-B/rrc", snr});
      if (std::abs(b - s) > worst_b) {
        worst_b = std::abs(b - s);
        worst_at = fmt::format("theta {} SNR {} dB", theta, snr);
      }
      if (std::abs(b - s) > 0.5) ++b_misses;
      if (theta > 0.0 && !(a > b && a > s))
        failures.push_back(fmt::format("roll-off sweep front end A not above at theta {} SNR {}", theta, snr));
    }
  }
  if (b_misses > 0)
    failures.push_back(fmt::format("roll-off sweep front end B outside 0.5 dB of sync at {} of {} points", b_misses,
                                   5 * f4.size()));

  std::string detail = fmt::format(
      "bandwidth sweep min margin {:.3f} dB, equality gap {:.1e} dB; load sweep min gap increase {:.4f} dB; roll-off sweep max |B - sync| "
      "{:.3f} dB at {}",
      min_margin, eq_gap, min_step, worst_b, worst_at);
  for (const auto& f : failures) detail += "\n        - " + f;
  return {failures.empty(), detail};
}

Outcome tau_independence() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double t2_err = 0.0;
  for (const auto& p : {ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1)), ChipPulse::sinc(0.8, 1.0, FrontEnd::type_a(2)),
                        ChipPulse::sinc(0.6, 1.0, FrontEnd::type_a(3))}) {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + static_cast<int>(u(rng) * 4);
      SystemEnsemble a = SystemEnsemble::equal_power(0.25 + u(rng), 0.1, false);
      a.atoms.clear();
      double total = 0.0;
      for (int j = 0; j < n; ++j) {
        a.atoms.push_back({0.2 + 2.0 * u(rng), 0.0, 0.1 + u(rng)});
        total += a.atoms.back().prob;
      }
      for (auto& at : a.atoms) at.prob /= total;
      SystemEnsemble b = a;
      for (auto& at : b.atoms) at.delay = u(rng);
      const auto ta = theorem2_recursion(a, p, 8);
      const auto tb = theorem2_recursion(b, p, 8);
      const auto t1 = theorem1_recursion(b, p, 8);
      for (int l = 1; l <= 8; ++l) {
        t2_err = std::max(t2_err, rel(tb.eig_moments[l], ta.eig_moments[l]));
        t2_err = std::max(t2_err, rel(t1.eig_moments[l], ta.eig_moments[l]));
        for (int j = 0; j < n; ++j) {
          t2_err = std::max(t2_err, rel(tb.R[j][l], ta.R[j][l]));
          t2_err = std::max(t2_err, rel(t1.R[j][l], ta.R[j][l]));
        }
      }
    }
  }

  double c1_err = 0.0;
  for (const auto& p : {ChipPulse::sinc(1.5, 1.0, FrontEnd::type_a(2)), ChipPulse::sinc(2.0, 1.0, FrontEnd::type_a(2)),
                        ChipPulse::root_raised_cosine(0.5, 1.0, FrontEnd::type_a(2))}) {
    SystemEnsemble e = SystemEnsemble::equal_power(0.5, 0.1, true);
    e.atoms = {{0.5, 0.0, 0.4}, {1.5, 0.0, 0.6}};
    RecursionOptions opts;
    std::vector<double> taus{0.0, 0.13, 0.25, 0.5, 0.71, 0.97};
    for (double lam : {0.5, 1.5})
      for (double tau : taus) opts.probes.emplace_back(lam, tau);
    const auto t1 = theorem1_recursion(e, p, 8, opts);
    const auto c1 = corollary1_recursion(e, p, 8);
    const std::size_t first = t1.classes.size() - opts.probes.size();
    for (std::size_t i = 0; i < opts.probes.size(); ++i) {
      const std::size_t atom = opts.probes[i].first == 0.5 ? 0 : 1;
      for (int l = 1; l <= 8; ++l) c1_err = std::max(c1_err, rel(t1.R[first + i][l], c1.R[atom][l]));
    }
  }
  return {t2_err <= 1e-10 && c1_err <= 1e-8,
          fmt::format("narrow-band max rel diff {:.2e}; uniform-delay probes max rel diff {:.2e}", t2_err, c1_err)};
}

Outcome frontend_b_alignment() {
  const auto p = ChipPulse::root_raised_cosine(0.5, 1.0, FrontEnd::type_b());
  int hits = 0;
  double min_margin = INFINITY;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FiniteSystemConfig c;
    c.N = 64;
    c.K = 32;
    c.window = 3;
    c.pulse = p;
    c.delays.kind = DelayKind::Uniform;
    c.n0 = 0.1;
    c.seed = 500 + seed;
    const int k = 5;  // user 0 is the timing reference with delay 0
    const double tau = build_system(c).delays[k];
    std::vector<double> energy;
    for (int j = 0; j < 8; ++j) {
      c.sampling_phase = std::fmod(tau + j / 8.0, 1.0);
      const auto s = frontend_b_system(c);
      energy.push_back(empirical_diag_moment(s, 1, k, s.center()));
    }
    const auto arg = std::max_element(energy.begin(), energy.end()) - energy.begin();
    if (arg == 0) ++hits;
    min_margin = std::min(min_margin, energy[0] - *std::max_element(energy.begin() + 1, energy.end()));
  }
  return {hits == 10, fmt::format("argmax at the user's delay for {}/10 seeds, min margin {:.3f}", hits, min_margin)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_configs = argv[1];
  const std::vector<Criterion> criteria{
      {1, "MP reduction", 1.0, mp_reduction},
      {2, "closed-form moments", 1.0, closed_form},
      {3, "engine equivalence", 30.0, engine_equivalence},
      {4, "scaling and equivalence identities", 10.0, scaling_identities},
      {5, "Monte Carlo concentration", 600.0, montecarlo_concentration},
      {6, "matched-filter desk check", 60.0, matched_filter},
      {7, "sweep properties", 120.0, sweep_properties},
      {8, "delay independence", 0.0, tau_independence},
      {9, "front end B alignment", 0.0, frontend_b_alignment},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt::format("{:.2f} s", secs);
    if (c.budget_s > 0.0) {
      timing += fmt::format(" of {:g} s", c.budget_s);
      if (secs > c.budget_s) {
        o.pass = false;
        o.detail += "; over the time budget";
      }
    }
    if (!o.pass) ++failed;
    fmt::print("{} {} {}: {} [{}]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail, timing);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed;
}
