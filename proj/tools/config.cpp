#include "config.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace acdma::config {

namespace {

class Reader {
 public:
  explicit Reader(std::filesystem::path path) : path_(std::move(path)) {
    try {
      root_ = YAML::LoadFile(path_.string());
    } catch (const YAML::BadFile&) {
      throw ConfigError(fmt::format("{}: cannot open config file", path_.string()));
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("{}:{}:{}: {}", path_.string(), e.mark.line + 1, e.mark.column + 1, e.msg));
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& msg) const {
    const auto m = at.Mark();
    if (m.is_null()) throw ConfigError(fmt::format("{}: {}: {}", path_.string(), field, msg));
    throw ConfigError(fmt::format("{}:{}:{}: {}: {}", path_.string(), m.line + 1, m.column + 1, field, msg));
  }

  YAML::Node block(const std::string& name) const {
    if (!root_.IsMap()) fail(root_, name, "config must be a mapping with a top-level block");
    const YAML::Node b = root_[name];
    if (!b) fail(root_, name, "block missing");
    if (!b.IsMap()) fail(b, name, "must be a mapping");
    return b;
  }

  void allow(const YAML::Node& node, const std::string& field, std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, field.empty() ? key : field + "." + key, "unknown field");
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field, fmt::format("cannot read '{}'", node.Scalar()));
    }
  }

  template <class T>
  T get(const YAML::Node& parent, const std::string& key, const std::string& field, T fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    return scalar<T>(n, field);
  }

  template <class T>
  T require(const YAML::Node& parent, const std::string& key, const std::string& field) const {
    const YAML::Node n = parent[key];
    if (!n) fail(parent, field, "required field missing");
    return scalar<T>(n, field);
  }

  // A scalar, a list, or {start, stop, step}.
  template <class T>
  std::vector<T> list(const YAML::Node& n, const std::string& field) const {
    std::vector<T> out;
    if (n.IsScalar()) {
      out.push_back(scalar<T>(n, field));
    } else if (n.IsSequence()) {
      for (std::size_t i = 0; i < n.size(); ++i) out.push_back(scalar<T>(n[i], fmt::format("{}[{}]", field, i)));
    } else if (n.IsMap() && std::is_arithmetic_v<T>) {
      allow(n, field, {"start", "stop", "step"});
      const double start = require<double>(n, "start", field + ".start");
      const double stop = require<double>(n, "stop", field + ".stop");
      const double step = require<double>(n, "step", field + ".step");
      if (!(step > 0.0)) fail(n, field + ".step", "must be positive");
      const long count = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
      if (count < 1) fail(n, field, "stop is below start");
      if constexpr (std::is_arithmetic_v<T>) {
        // Round through 12 significant digits so 0.1 steps print as typed.
        for (long i = 0; i < count; ++i)
          out.push_back(static_cast<T>(std::stod(fmt::format("{:.12g}", start + i * step))));
      }
    } else {
      fail(n, field, "expected a value, a list or {start, stop, step}");
    }
    if (out.empty()) fail(n, field, "empty grid");
    if constexpr (std::is_arithmetic_v<T>) {
      for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) fail(n, field, "values must be strictly increasing");
    }
    return out;
  }

  template <class T>
  std::vector<T> list_or(const YAML::Node& parent, const std::string& key, const std::string& field,
                         std::vector<T> fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    return list<T>(n, field);
  }

  // n0 directly or through snr_db = -10 log10(n0).
  double noise(const YAML::Node& parent, const std::string& field, double fallback) const {
    const bool has_n0 = static_cast<bool>(parent["n0"]);
    const bool has_snr = static_cast<bool>(parent["snr_db"]);
    if (has_n0 && has_snr) fail(parent, field, "give either n0 or snr_db, not both");
    if (has_n0) {
      const double v = scalar<double>(parent["n0"], field + ".n0");
      if (!(v >= 0.0)) fail(parent["n0"], field + ".n0", "must be non-negative");
      return v;
    }
    if (has_snr) return from_db(-scalar<double>(parent["snr_db"], field + ".snr_db"));
    return fallback;
  }

  ChipPulse pulse(const YAML::Node& n, const std::string& field) const {
    if (!n) fail(root_, field, "required block missing");
    if (!n.IsMap()) fail(n, field, "must be a mapping");
    allow(n, field, {"shape", "gamma", "rolloff", "file", "resolution", "chip_interval", "front_end", "oversampling"});
    const auto shape = require<std::string>(n, "shape", field + ".shape");
    const double tc = get<double>(n, "chip_interval", field + ".chip_interval", 1.0);
    if (!(tc > 0.0)) fail(n["chip_interval"], field + ".chip_interval", "must be positive");
    const auto fe = get<std::string>(n, "front_end", field + ".front_end", "A");
    if (fe != "A" && fe != "B") fail(n["front_end"], field + ".front_end", "must be A or B");
    if (fe == "B" && n["oversampling"] && scalar<int>(n["oversampling"], field + ".oversampling") != 1)
      fail(n["oversampling"], field + ".oversampling", "front end B samples at chip rate (r = 1)");
    auto front = [&](double bandwidth) {
      if (fe == "B") return FrontEnd::type_b();
      const int r = n["oversampling"] ? scalar<int>(n["oversampling"], field + ".oversampling")
                                      : minimal_oversampling(bandwidth, tc);
      if (r < 1) fail(n["oversampling"], field + ".oversampling", "must be >= 1");
      return FrontEnd::type_a(r);
    };
    try {
      if (shape == "sinc") {
        const double g = require<double>(n, "gamma", field + ".gamma");
        return ChipPulse::sinc(g, tc, front(g / (2.0 * tc)));
      }
      if (shape == "rrc") {
        const double a = require<double>(n, "rolloff", field + ".rolloff");
        return ChipPulse::root_raised_cosine(a, tc, front((1.0 + a) / (2.0 * tc)));
      }
      if (shape == "tabulated") {
        auto file = std::filesystem::path(require<std::string>(n, "file", field + ".file"));
        if (file.is_relative()) file = path_.parent_path() / file;
        const auto res = get<int>(n, "resolution", field + ".resolution", 4096);
        if (fe == "A" && !n["oversampling"]) fail(n, field + ".oversampling", "required for tabulated pulses");
        return ChipPulse::load_tabulated(file, tc, front(0.0), static_cast<std::size_t>(res));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(n, field, e.what());
    }
    fail(n["shape"], field + ".shape", fmt::format("unknown shape '{}' (sinc, rrc, tabulated)", shape));
  }

  RecursionOptions recursion(const YAML::Node& b, const std::string& field) const {
    RecursionOptions o;
    o.grid_size = get<int>(b, "grid_size", field + ".grid_size", o.grid_size);
    o.delay_nodes = get<int>(b, "delay_nodes", field + ".delay_nodes", o.delay_nodes);
    const auto rule = get<std::string>(b, "rule", field + ".rule", "gauss-legendre");
    if (rule == "gauss-legendre") {
      o.rule = FrequencyRule::GaussLegendrePanels;
    } else if (rule == "trapezoid") {
      o.rule = FrequencyRule::PeriodicTrapezoid;
    } else {
      fail(b["rule"], field + ".rule", "must be gauss-legendre or trapezoid");
    }
    if (o.grid_size < 64) fail(b["grid_size"], field + ".grid_size", "must be >= 64");
    if (o.delay_nodes < 1) fail(b["delay_nodes"], field + ".delay_nodes", "must be >= 1");
    return o;
  }

  SolveOptions solve(const YAML::Node& b, const std::string& field) const {
    SolveOptions s;
    s.ridge = get<bool>(b, "ridge", field + ".ridge", false);
    s.max_condition = get<double>(b, "max_condition", field + ".max_condition", s.max_condition);
    return s;
  }

  std::vector<PowerDelayAtom> atoms(const YAML::Node& n, const std::string& field, bool with_delay) const {
    if (!n.IsSequence()) fail(n, field, "expected a list of atoms");
    if (n.size() == 0) fail(n, field, "empty list");
    std::vector<PowerDelayAtom> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string f = fmt::format("{}[{}]", field, i);
      if (!n[i].IsMap()) fail(n[i], f, "expected a mapping");
      if (with_delay) {
        allow(n[i], f, {"power", "delay", "prob"});
      } else {
        allow(n[i], f, {"power", "prob"});
      }
      PowerDelayAtom a;
      a.power = get<double>(n[i], "power", f + ".power", 1.0);
      a.delay = with_delay ? get<double>(n[i], "delay", f + ".delay", 0.0) : 0.0;
      a.prob = get<double>(n[i], "prob", f + ".prob", 1.0);
      out.push_back(a);
    }
    return out;
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  YAML::Node root_;
};

}  // namespace

std::vector<Provenance> parse_engines(const std::string& list) {
  std::vector<Provenance> out;
  if (list == "all" || list.empty()) return out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(provenance_from_string(item));
  return out;
}

MomentsSpec load_moments(const std::filesystem::path& path) {
  const Reader rd(path);
  const auto b = rd.block("moments");
  rd.allow(b, "moments",
           {"pulse", "ensemble", "depth", "engines", "grid_size", "delay_nodes", "rule", "probes"});
  MomentsSpec s;
  s.pulse = rd.pulse(b["pulse"], "moments.pulse");
  const auto e = b["ensemble"];
  if (!e) rd.fail(b, "moments.ensemble", "required block missing");
  rd.allow(e, "moments.ensemble", {"load", "n0", "snr_db", "uniform_delay", "atoms"});
  s.ensemble.load = rd.require<double>(e, "load", "moments.ensemble.load");
  s.ensemble.n0 = rd.noise(e, "moments.ensemble", 0.1);
  s.ensemble.uniform_delay = rd.get<bool>(e, "uniform_delay", "moments.ensemble.uniform_delay", false);
  if (e["atoms"]) s.ensemble.atoms = rd.atoms(e["atoms"], "moments.ensemble.atoms", true);
  try {
    s.ensemble.validate(s.pulse.chip_interval());
  } catch (const std::exception& ex) {
    rd.fail(e, "moments.ensemble", ex.what());
  }
  s.depth = rd.get<int>(b, "depth", "moments.depth", 6);
  if (s.depth < 1) rd.fail(b["depth"], "moments.depth", "must be >= 1");
  if (const auto en = b["engines"]) {
    if (en.IsScalar()) {
      try {
        s.engines = parse_engines(en.as<std::string>());
      } catch (const std::exception& ex) {
        rd.fail(en, "moments.engines", ex.what());
      }
    } else {
      const auto names = rd.list_or<std::string>(b, "engines", "moments.engines", {});
      for (std::size_t i = 0; i < names.size(); ++i) {
        try {
          s.engines.push_back(provenance_from_string(names[i]));
        } catch (const std::exception& ex) {
          rd.fail(en[i], fmt::format("moments.engines[{}]", i), ex.what());
        }
      }
    }
  }
  s.options = rd.recursion(b, "moments");
  if (const auto p = b["probes"]) {
    for (const auto& a : rd.atoms(p, "moments.probes", true)) s.options.probes.emplace_back(a.power, a.delay);
  }
  for (auto en : s.engines) {
    if (!engine_applies(en, s.ensemble, s.pulse, s.depth))
      rd.fail(b, "moments.engines", fmt::format("engine {} does not apply to this pulse and ensemble", to_string(en)));
  }
  return s;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  const Reader rd(path);
  const auto b = rd.block("sweep");
  rd.allow(b, "sweep",
           {"axis", "grid", "curves", "bandwidth", "load", "snr_db", "rank", "chip_interval", "ridge",
            "max_condition", "grid_size", "delay_nodes", "rule"});
  SweepSpec s;
  const auto axis = rd.require<std::string>(b, "axis", "sweep.axis");
  try {
    s.axis = sweep_axis_from_string(axis);
  } catch (const std::exception& ex) {
    rd.fail(b["axis"], "sweep.axis", ex.what());
  }
  if (!b["grid"]) rd.fail(b, "sweep.grid", "required field missing");
  s.grid = rd.list<double>(b["grid"], "sweep.grid");
  const auto curves = b["curves"];
  if (!curves || !curves.IsSequence() || curves.size() == 0)
    rd.fail(curves ? curves : b, "sweep.curves", "expected a non-empty list of {scenario, pulse}");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const std::string f = fmt::format("sweep.curves[{}]", i);
    rd.allow(curves[i], f, {"scenario", "pulse"});
    Curve c;
    try {
      c.scenario = scenario_from_string(rd.require<std::string>(curves[i], "scenario", f + ".scenario"));
      c.pulse = pulse_kind_from_string(rd.require<std::string>(curves[i], "pulse", f + ".pulse"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      rd.fail(curves[i], f, ex.what());
    }
    s.curves.push_back(c);
  }
  s.bandwidth = rd.list_or<double>(b, "bandwidth", "sweep.bandwidth", s.bandwidth);
  s.load = rd.list_or<double>(b, "load", "sweep.load", s.load);
  s.snr_db = rd.list_or<double>(b, "snr_db", "sweep.snr_db", s.snr_db);
  s.rank = rd.list_or<int>(b, "rank", "sweep.rank", s.rank);
  s.chip_interval = rd.get<double>(b, "chip_interval", "sweep.chip_interval", 1.0);
  s.solve = rd.solve(b, "sweep");
  s.recursion = rd.recursion(b, "sweep");
  try {
    s.validate();
  } catch (const std::exception& ex) {
    rd.fail(b, "sweep", ex.what());
  }
  return s;
}

MonteCarloSpec load_montecarlo(const std::filesystem::path& path) {
  const Reader rd(path);
  const auto b = rd.block("montecarlo");
  rd.allow(b, "montecarlo",
           {"pulse", "N", "K", "window", "delays", "powers", "n0", "snr_db", "seed", "seeds", "depth", "gate_pct",
            "memory_cap_gib", "sampling_phase", "sinr", "ridge", "max_condition", "grid_size", "delay_nodes",
            "rule"});
  MonteCarloSpec s;
  auto& c = s.system;
  c.pulse = rd.pulse(b["pulse"], "montecarlo.pulse");
  c.N = rd.require<int>(b, "N", "montecarlo.N");
  c.K = rd.require<int>(b, "K", "montecarlo.K");
  c.window = rd.get<int>(b, "window", "montecarlo.window", 9);
  const auto delays = rd.get<std::string>(b, "delays", "montecarlo.delays", "uniform");
  if (delays == "uniform") {
    c.delays.kind = DelayKind::Uniform;
  } else if (delays == "synchronous") {
    c.delays.kind = DelayKind::Synchronous;
  } else {
    rd.fail(b["delays"], "montecarlo.delays", "must be uniform or synchronous");
  }
  if (b["powers"]) c.powers.atoms = rd.atoms(b["powers"], "montecarlo.powers", false);
  c.n0 = rd.noise(b, "montecarlo", 0.1);
  c.seed = rd.get<std::uint64_t>(b, "seed", "montecarlo.seed", 1);
  c.sampling_phase = rd.get<double>(b, "sampling_phase", "montecarlo.sampling_phase", 0.0);
  const double cap = rd.get<double>(b, "memory_cap_gib", "montecarlo.memory_cap_gib", 2.0);
  if (!(cap > 0.0)) rd.fail(b["memory_cap_gib"], "montecarlo.memory_cap_gib", "must be positive");
  c.memory_cap = static_cast<std::size_t>(cap * (1ull << 30));
  s.seeds = rd.get<int>(b, "seeds", "montecarlo.seeds", 20);
  s.depth = rd.get<int>(b, "depth", "montecarlo.depth", 4);
  s.gate_pct = rd.get<double>(b, "gate_pct", "montecarlo.gate_pct", 3.0);
  if (const auto si = b["sinr"]) {
    rd.allow(si, "montecarlo.sinr", {"rank", "trials", "batches"});
    MonteCarloSinr m;
    m.rank = rd.get<int>(si, "rank", "montecarlo.sinr.rank", m.rank);
    m.trials = rd.get<int>(si, "trials", "montecarlo.sinr.trials", m.trials);
    m.batches = rd.get<int>(si, "batches", "montecarlo.sinr.batches", m.batches);
    s.sinr = m;
  }
  s.solve = rd.solve(b, "montecarlo");
  s.recursion = rd.recursion(b, "montecarlo");
  try {
    s.validate();
  } catch (const std::exception& ex) {
    rd.fail(b, "montecarlo", ex.what());
  }
  return s;
}

}  // namespace acdma::config
