#include "acdma/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "acdma/parallel.hpp"

namespace acdma {

namespace {

constexpr std::uint64_t kSeedStream = 6;

bool narrow_band(const ChipPulse& pulse) {
  return pulse.bandwidth() <= 1.0 / (2.0 * pulse.chip_interval()) * (1.0 + 1e-12);
}

// R_ell of atom j averaged over its delay nodes when the table has them.
double atom_mean(const MomentTable& t, std::size_t j, int ell) {
  const std::size_t atoms = t.atom_count();
  std::size_t nodes = 0;
  for (const auto& c : t.classes) nodes += c.role == ClassRole::DelayNode;
  if (nodes == 0) return t.R_at(j, ell);
  const std::size_t per = nodes / atoms;
  double acc = 0.0, w = 0.0;
  for (std::size_t i = 0; i < per; ++i) {
    const std::size_t c = atoms + j * per + i;
    acc += t.classes[c].weight * t.R_at(c, ell);
    w += t.classes[c].weight;
  }
  return acc / w;
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);  // shortest form that reads back exactly
}

template <class T>
void require_increasing(const std::vector<T>& v, const char* name) {
  if (v.empty()) throw std::invalid_argument(fmt::format("{}: empty grid", name));
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw std::invalid_argument(fmt::format("{}: grid must be strictly increasing", name));
}

}  // namespace

// ---- moments -----------------------------------------------------------------

bool engine_applies(Provenance engine, const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth) {
  switch (engine) {
    case Provenance::Theorem1:
      return true;
    case Provenance::Corollary1:
      return ensemble.uniform_delay && pulse.is_type_a();
    case Provenance::Theorem2:
      return pulse.is_type_a() && narrow_band(pulse);
    case Provenance::Algorithm1:
      return pulse.is_type_a() && (ensemble.uniform_delay || narrow_band(pulse)) && depth <= kAlgorithm1MaxDepth;
  }
  return false;
}

MomentTable run_engine(Provenance engine, const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth,
                       const RecursionOptions& opts) {
  switch (engine) {
    case Provenance::Theorem1:
      return theorem1_recursion(ensemble, pulse, depth, opts);
    case Provenance::Corollary1:
      return corollary1_recursion(ensemble, pulse, depth, opts);
    case Provenance::Theorem2:
      return theorem2_recursion(ensemble, pulse, depth, opts);
    case Provenance::Algorithm1:
      return algorithm1(ensemble, pulse, depth).table;
  }
  throw std::invalid_argument("unknown engine");
}

std::vector<MomentRow> run_moments(const MomentsSpec& spec) {
  if (spec.depth < 1) throw std::invalid_argument("depth must be >= 1");
  std::vector<Provenance> engines = spec.engines;
  if (engines.empty()) {
    for (auto e : {Provenance::Theorem1, Provenance::Corollary1, Provenance::Theorem2, Provenance::Algorithm1})
      if (engine_applies(e, spec.ensemble, spec.pulse, spec.depth)) engines.push_back(e);
  }
  std::vector<MomentRow> rows;
  for (auto e : engines) {
    const MomentTable t = run_engine(e, spec.ensemble, spec.pulse, spec.depth, spec.options);
    for (int l = 1; l <= spec.depth; ++l) {
      for (std::size_t c = 0; c < t.classes.size(); ++c) {
        const auto& cls = t.classes[c];
        if (cls.role == ClassRole::DelayNode) continue;
        rows.push_back({e, l, c, cls.role, cls.power, cls.delay, t.R_at(c, l), t.eig_moments[l]});
      }
    }
  }
  return rows;
}

void write_moment_csv(std::ostream& os, const std::vector<MomentRow>& rows) {
  os << "engine,ell,class,role,lambda,tau,R,m\n";
  for (const auto& r : rows) {
    os << to_string(r.engine) << ',' << r.ell << ',' << r.cls << ',' << to_string(r.role) << ','
       << fmt_double(r.power) << ',' << fmt_double(r.delay) << ',' << fmt_double(r.R) << ',' << fmt_double(r.m)
       << '\n';
  }
}

double engine_spread(const std::vector<MomentRow>& rows) {
  std::map<std::pair<int, std::size_t>, std::pair<double, double>> range;
  std::map<int, std::pair<double, double>> mrange;
  for (const auto& r : rows) {
    auto [it, fresh] = range.try_emplace({r.ell, r.cls}, r.R, r.R);
    it->second.first = std::min(it->second.first, r.R);
    it->second.second = std::max(it->second.second, r.R);
    auto [mt, mfresh] = mrange.try_emplace(r.ell, r.m, r.m);
    mt->second.first = std::min(mt->second.first, r.m);
    mt->second.second = std::max(mt->second.second, r.m);
  }
  double worst = 0.0;
  for (const auto& [k, v] : range)
    worst = std::max(worst, (v.second - v.first) / std::max(std::abs(v.second), 1e-300));
  for (const auto& [k, v] : mrange)
    worst = std::max(worst, (v.second - v.first) / std::max(std::abs(v.second), 1e-300));
  return worst;
}

// ---- SINR sweeps -------------------------------------------------------------

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Sync: return "sync";
    case Scenario::AsyncA: return "async-A";
    case Scenario::AsyncB: return "async-B";
  }
  return "?";
}

const char* to_string(PulseKind p) {
  switch (p) {
    case PulseKind::Sinc: return "sinc";
    case PulseKind::RootRaisedCosine: return "rrc";
  }
  return "?";
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Bandwidth: return "bandwidth";
    case SweepAxis::Load: return "load";
    case SweepAxis::Rolloff: return "rolloff";
    case SweepAxis::Snr: return "snr";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  for (auto v : {Scenario::Sync, Scenario::AsyncA, Scenario::AsyncB})
    if (s == to_string(v)) return v;
  throw std::invalid_argument(fmt::format("unknown scenario '{}' (sync, async-A, async-B)", s));
}

PulseKind pulse_kind_from_string(const std::string& s) {
  for (auto v : {PulseKind::Sinc, PulseKind::RootRaisedCosine})
    if (s == to_string(v)) return v;
  throw std::invalid_argument(fmt::format("unknown pulse '{}' (sinc, rrc)", s));
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  for (auto v : {SweepAxis::Bandwidth, SweepAxis::Load, SweepAxis::Rolloff, SweepAxis::Snr})
    if (s == to_string(v)) return v;
  throw std::invalid_argument(fmt::format("unknown sweep axis '{}' (bandwidth, load, rolloff, snr)", s));
}

int minimal_oversampling(double bandwidth, double chip_interval) {
  return std::max(1, static_cast<int>(std::ceil(2.0 * bandwidth * chip_interval * (1.0 - 1e-12))));
}

double pulse_shape_parameter(PulseKind pulse, double bandwidth) {
  return pulse == PulseKind::Sinc ? 2.0 * bandwidth : 2.0 * bandwidth - 1.0;
}

ChipPulse scenario_pulse(const ScenarioPoint& p) {
  const double tc = p.chip_interval;
  const double shape = pulse_shape_parameter(p.pulse, p.bandwidth);
  if (p.pulse == PulseKind::RootRaisedCosine && !(shape >= -1e-12 && shape <= 1.0 + 1e-12))
    throw std::invalid_argument(fmt::format(
        "root-raised-cosine bandwidth B T_c = {} outside [0.5, 1]", p.bandwidth));
  const double rolloff = std::clamp(shape, 0.0, 1.0);
  if (p.scenario == Scenario::AsyncB) {
    if (p.pulse != PulseKind::RootRaisedCosine)
      throw std::invalid_argument("async-B needs root-raised-cosine chips");
    return ChipPulse::root_raised_cosine(rolloff, tc, FrontEnd::type_b());
  }
  const FrontEnd fe = FrontEnd::type_a(minimal_oversampling(p.bandwidth / tc, tc));
  if (p.pulse == PulseKind::Sinc) return ChipPulse::sinc(shape, tc, fe);
  return ChipPulse::root_raised_cosine(rolloff, tc, fe);
}

ScenarioResult evaluate_scenario(const ScenarioPoint& point) {
  if (point.rank < 1) throw std::invalid_argument("rank must be >= 1");
  const ChipPulse pulse = scenario_pulse(point);
  SystemEnsemble e = SystemEnsemble::equal_power(point.load, from_db(-point.snr_db),
                                                 point.scenario != Scenario::Sync);
  const int depth = 2 * point.rank;
  ScenarioResult res;
  res.oversampling = pulse.oversampling();
  res.noise_variance = noise_variance(e, pulse);
  RecursionOptions opts = point.recursion;
  switch (point.scenario) {
    case Scenario::Sync:
      res.engine = narrow_band(pulse) ? Provenance::Theorem2 : Provenance::Theorem1;
      break;
    case Scenario::AsyncA:
      res.engine = Provenance::Corollary1;
      break;
    case Scenario::AsyncB:
      res.engine = Provenance::Theorem1;
      opts.probes = {{1.0, 0.0}};
      break;
  }
  res.table = run_engine(res.engine, e, pulse, depth, opts);
  res.cls = point.scenario == Scenario::AsyncB ? res.table.classes.size() - 1 : 0;
  res.design = wiener_design(res.table, res.cls, res.noise_variance, point.rank, point.solve);
  return res;
}

void SweepSpec::validate() const {
  require_increasing(grid, "grid");
  if (curves.empty()) throw std::invalid_argument("curves: at least one curve required");
  if (axis != SweepAxis::Bandwidth && axis != SweepAxis::Rolloff) require_increasing(bandwidth, "bandwidth");
  if (axis != SweepAxis::Load) require_increasing(load, "load");
  if (axis != SweepAxis::Snr) require_increasing(snr_db, "snr_db");
  require_increasing(rank, "rank");
  if (!(chip_interval > 0.0)) throw std::invalid_argument("chip_interval must be positive");
  for (const auto& c : curves) {
    if (c.scenario == Scenario::AsyncB && c.pulse != PulseKind::RootRaisedCosine)
      throw std::invalid_argument("curves: async-B needs pulse rrc");
    if (axis == SweepAxis::Rolloff && c.pulse != PulseKind::RootRaisedCosine)
      throw std::invalid_argument("curves: a rolloff axis needs pulse rrc");
  }
  for (int r : rank)
    if (r < 1) throw std::invalid_argument("rank: values must be >= 1");
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  const bool bw_axis = spec.axis == SweepAxis::Bandwidth || spec.axis == SweepAxis::Rolloff;
  const std::vector<double> one{0.0};
  std::vector<SweepRow> rows;
  for (double v : spec.grid) {
    for (const auto& c : spec.curves) {
      for (double b : bw_axis ? one : spec.bandwidth) {
        for (double l : spec.axis == SweepAxis::Load ? one : spec.load) {
          for (double s : spec.axis == SweepAxis::Snr ? one : spec.snr_db) {
            for (int k : spec.rank) {
              SweepRow r;
              r.value = v;
              r.curve = c;
              r.bandwidth = spec.axis == SweepAxis::Bandwidth ? v
                            : spec.axis == SweepAxis::Rolloff ? 0.5 * (1.0 + v)
                                                              : b;
              r.load = spec.axis == SweepAxis::Load ? v : l;
              r.snr_db = spec.axis == SweepAxis::Snr ? v : s;
              r.rank = k;
              r.shape = pulse_shape_parameter(c.pulse, r.bandwidth);
              rows.push_back(r);
            }
          }
        }
      }
    }
  }
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    auto& r = rows[i];
    ScenarioPoint p;
    p.scenario = r.curve.scenario;
    p.pulse = r.curve.pulse;
    p.bandwidth = r.bandwidth;
    p.load = r.load;
    p.snr_db = r.snr_db;
    p.rank = r.rank;
    p.chip_interval = spec.chip_interval;
    p.solve = spec.solve;
    p.recursion = spec.recursion;
    const auto res = evaluate_scenario(p);
    r.oversampling = res.oversampling;
    r.sinr = res.design.sinr;
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "value,scenario,pulse,bandwidth,shape,oversampling,load,snr_db,L,sinr,sinr_db\n";
  for (const auto& r : rows) {
    os << fmt_double(r.value) << ',' << to_string(r.curve.scenario) << ',' << to_string(r.curve.pulse) << ','
       << fmt_double(r.bandwidth) << ',' << fmt_double(r.shape) << ',' << r.oversampling << ','
       << fmt_double(r.load) << ',' << fmt_double(r.snr_db) << ',' << r.rank << ',' << fmt_double(r.sinr) << ','
       << fmt_double(to_db(r.sinr)) << '\n';
  }
}

// ---- Monte Carlo -------------------------------------------------------------

void MonteCarloSpec::validate() const {
  system.validate();
  if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (system.delays.kind == DelayKind::Fixed)
    throw std::invalid_argument("delays: Monte Carlo comparisons need uniform or synchronous delays");
  if (!(gate_pct > 0.0)) throw std::invalid_argument("gate must be positive");
  if (sinr) {
    if (sinr->rank < 1) throw std::invalid_argument("sinr.rank must be >= 1");
    if (sinr->trials < sinr->batches || sinr->batches < 2)
      throw std::invalid_argument("sinr: need trials >= batches >= 2");
  }
}

namespace {

SystemEnsemble reference_ensemble(const FiniteSystemConfig& c) {
  SystemEnsemble e;
  e.load = static_cast<double>(c.K) / c.N;
  e.n0 = c.n0;
  e.uniform_delay = c.delays.kind == DelayKind::Uniform;
  e.atoms.clear();
  if (!c.powers.per_user.empty()) {
    std::map<double, int> count;
    for (double p : c.powers.per_user) ++count[p];
    for (const auto& [p, n] : count) e.atoms.push_back({p, 0.0, static_cast<double>(n) / c.K});
  } else {
    for (const auto& a : c.powers.atoms) e.atoms.push_back({a.power, 0.0, a.prob});
  }
  return e;
}

Provenance reference_engine(const SystemEnsemble& e, const ChipPulse& pulse) {
  if (e.uniform_delay && pulse.is_type_a()) return Provenance::Corollary1;
  if (!e.uniform_delay && pulse.is_type_a() && narrow_band(pulse)) return Provenance::Theorem2;
  return Provenance::Theorem1;
}

struct Accumulator {
  double sum = 0.0;
  double sum2 = 0.0;
  long n = 0;

  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  void merge(const Accumulator& o) {
    sum += o.sum;
    sum2 += o.sum2;
    n += o.n;
  }
  double mean() const { return sum / n; }
  double variance() const { return n > 1 ? (sum2 - sum * sum / n) / (n - 1) : 0.0; }
};

}  // namespace

MomentTable asymptotic_reference(const FiniteSystemConfig& config, int depth, const RecursionOptions& opts) {
  if (config.delays.kind == DelayKind::Fixed)
    throw std::invalid_argument("asymptotic reference needs uniform or synchronous delays");
  const SystemEnsemble e = reference_ensemble(config);
  return run_engine(reference_engine(e, config.pulse), e, config.pulse, depth, opts);
}

MonteCarloReport run_montecarlo(const MonteCarloSpec& spec, int jobs) {
  spec.validate();
  const MomentTable ref = asymptotic_reference(spec.system, spec.depth, spec.recursion);
  const SystemEnsemble ens = reference_ensemble(spec.system);
  const std::size_t classes = ens.atoms.size();

  // acc[seed][class][ell-1]
  std::vector<std::vector<std::vector<Accumulator>>> acc(
      spec.seeds, std::vector<std::vector<Accumulator>>(classes, std::vector<Accumulator>(spec.depth)));
  parallel_for(static_cast<std::size_t>(spec.seeds), jobs, [&](std::size_t s) {
    FiniteSystemConfig c = spec.system;
    c.seed = derive_seed(spec.system.seed, kSeedStream, static_cast<std::int64_t>(s));
    const FiniteSystem sys = build_system(c);
    const Eigen::MatrixXd d = empirical_diag_moments(sys, spec.depth, sys.center());
    for (int k = 0; k < sys.K; ++k) {
      std::size_t j = 0;
      for (std::size_t i = 1; i < classes; ++i)
        if (std::abs(ens.atoms[i].power - sys.power(k)) < std::abs(ens.atoms[j].power - sys.power(k))) j = i;
      for (int l = 0; l < spec.depth; ++l) acc[s][j][l].add(d(k, l));
    }
  });

  MonteCarloReport rep;
  const double gate = spec.gate_pct / 100.0;
  auto push = [&](long seed, const std::string& q, double power, double emp, double asym, double var,
                  double half, long n) {
    MonteCarloRow row{seed, q, power, emp, asym, std::abs(emp - asym) / std::abs(asym), var, emp - half,
                      emp + half, n};
    // Single-seed rows are informational; the gate applies to pooled rows.
    if (seed < 0 && !(row.rel_error <= gate)) rep.passed = false;
    rep.rows.push_back(row);
  };
  for (std::size_t j = 0; j < classes; ++j) {
    for (int l = 1; l <= spec.depth; ++l) {
      const double asym = atom_mean(ref, j, l);
      Accumulator pooled;
      for (int s = 0; s < spec.seeds; ++s) {
        const auto& a = acc[s][j][l - 1];
        if (a.n == 0) continue;
        pooled.merge(a);
        push(s, fmt::format("R{}", l), ens.atoms[j].power, a.mean(), asym, a.variance(),
             1.96 * std::sqrt(a.variance() / a.n), a.n);
      }
      if (pooled.n == 0) continue;
      push(-1, fmt::format("R{}", l), ens.atoms[j].power, pooled.mean(), asym, pooled.variance(),
           1.96 * std::sqrt(pooled.variance() / pooled.n), pooled.n);
    }
  }

  if (spec.sinr) {
    // The user of interest is user 0: delay 0, power of the first class.
    const int L = spec.sinr->rank;
    RecursionOptions opts = spec.recursion;
    const double lambda0 = !spec.system.powers.per_user.empty() ? spec.system.powers.per_user[0]
                                                                : spec.system.powers.atoms[0].power;
    opts.probes = {{lambda0, 0.0}};
    const MomentTable t = run_engine(reference_engine(ens, spec.system.pulse), ens, spec.system.pulse, 2 * L, opts);
    const double sigma2 = noise_variance(spec.system.n0, spec.system.pulse);
    const auto design = wiener_design(t, t.classes.size() - 1, sigma2, L, spec.solve);
    EnsembleSinrOptions o;
    o.trials = spec.sinr->trials;
    o.batches = spec.sinr->batches;
    o.users = {0};
    o.jobs = jobs;
    const auto est = ensemble_signal_level_sinr(spec.system, design.weights, o);
    MonteCarloRow row{-1, fmt::format("sinr_L{}", L), lambda0, est.sinr, design.sinr,
                      std::abs(est.sinr - design.sinr) / design.sinr, 0.0, est.ci_low, est.ci_high, est.samples};
    if (!(row.rel_error <= gate)) rep.passed = false;
    rep.rows.push_back(row);
  }
  return rep;
}

void write_montecarlo_csv(std::ostream& os, const std::vector<MonteCarloRow>& rows) {
  os << "seed,quantity,power,samples,empirical,asymptotic,rel_error,variance,ci_low,ci_high\n";
  for (const auto& r : rows) {
    os << (r.seed < 0 ? std::string("all") : std::to_string(r.seed)) << ',' << r.quantity << ','
       << fmt_double(r.power) << ',' << r.samples << ',' << fmt_double(r.empirical) << ','
       << fmt_double(r.asymptotic) << ',' << fmt_double(r.rel_error) << ',' << fmt_double(r.variance) << ','
       << fmt_double(r.ci_low) << ',' << fmt_double(r.ci_high) << '\n';
  }
}

}  // namespace acdma
