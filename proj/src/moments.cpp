#include "acdma/moments.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "acdma/quadrature.hpp"

namespace acdma {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_depth(int depth) {
  if (depth < 0) throw std::invalid_argument("recursion depth must be >= 0");
}

void check_finite(double v, int ell, const UserClass& c, const char* what) {
  if (!std::isfinite(v)) {
    throw MomentError(fmt::format("non-finite {} at ell={} for class lambda={:.6g} tau={:.6g}", what,
                                  ell, c.power, c.delay));
  }
}

std::vector<UserClass> atom_classes(const SystemEnsemble& e, bool contributes) {
  std::vector<UserClass> out;
  for (const auto& a : e.atoms)
    out.push_back({a.power, a.delay, contributes ? a.prob : 0.0, ClassRole::Atom});
  return out;
}

void append_probes(std::vector<UserClass>& classes, const RecursionOptions& opts) {
  for (const auto& [lambda, tau] : opts.probes) classes.push_back({lambda, tau, 0.0, ClassRole::Probe});
}

MomentTable make_table(Provenance p, const SystemEnsemble& e, const ChipPulse& pulse, int depth) {
  MomentTable t;
  t.provenance = p;
  t.depth = depth;
  t.load = e.load;
  t.oversampling = pulse.oversampling();
  t.chip_interval = pulse.chip_interval();
  return t;
}

void fill_eig_moments(MomentTable& t) {
  t.eig_moments.assign(t.depth + 1, 0.0);
  for (std::size_t c = 0; c < t.classes.size(); ++c) {
    const double w = t.classes[c].weight;
    if (w == 0.0) continue;
    for (int l = 0; l <= t.depth; ++l) t.eig_moments[l] += w * t.R[c][l];
  }
  t.eig_moments[0] = 1.0;
}

// Shared body of the two scalar recursions.
//   T_l(w) = (r/T_c) sum_s c_f f(R_{l-s-1}) (1/T_c)|Phi(w)|^2 T_s(w)
//   nu_l   = c_nu * integral |Phi|^2 T_l
//   R_l    = sum_s lambda R_s nu_{l-s-1}
// with f(R) = f_beta * E{lambda R}.
MomentTable scalar_recursion(Provenance prov, const SystemEnsemble& ensemble, const ChipPulse& pulse,
                             int depth, const RecursionOptions& opts, double t0, double c_nu,
                             double c_f, double f_beta) {
  const double tc = pulse.chip_interval();
  const double r = pulse.oversampling();
  MomentTable t = make_table(prov, ensemble, pulse, depth);
  t.classes = atom_classes(ensemble, true);
  append_probes(t.classes, opts);

  const auto bp = pulse.breakpoints();
  const auto rule = gauss_legendre_panels(bp, opts.grid_size);
  t.grid = rule.nodes;
  t.grid_weights = rule.weights;
  const std::size_t n = rule.size();
  std::vector<double> phi2(n);
  for (std::size_t i = 0; i < n; ++i) phi2[i] = std::norm(pulse.spectrum(rule.nodes[i]));

  std::vector<std::vector<double>> T(depth + 1, std::vector<double>(n, 0.0));
  std::fill(T[0].begin(), T[0].end(), t0);
  t.nu.assign(depth + 1, 0.0);
  t.f.assign(depth + 1, 0.0);
  t.R.assign(t.classes.size(), std::vector<double>(depth + 1, 0.0));
  for (auto& row : t.R) row[0] = 1.0;

  const auto nu_of = [&](const std::vector<double>& Tl) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += rule.weights[i] * phi2[i] * Tl[i];
    return c_nu * acc;
  };
  const auto f_of = [&](int l) {
    double acc = 0.0;
    for (std::size_t c = 0; c < t.classes.size(); ++c)
      acc += t.classes[c].weight * t.classes[c].power * t.R[c][l];
    return f_beta * acc;
  };

  if (depth >= 0) t.nu[0] = nu_of(T[0]);
  for (int l = 1; l <= depth; ++l) {
    for (std::size_t c = 0; c < t.classes.size(); ++c) {
      double acc = 0.0;
      for (int s = 0; s < l; ++s) acc += t.classes[c].power * t.R[c][s] * t.nu[l - s - 1];
      check_finite(acc, l, t.classes[c], "R");
      t.R[c][l] = acc;
    }
    t.f[l - 1] = f_of(l - 1);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int s = 0; s < l; ++s) acc += c_f * t.f[l - s - 1] * phi2[i] / tc * T[s][i];
      T[l][i] = r / tc * acc;
    }
    t.nu[l] = nu_of(T[l]);
    if (!std::isfinite(t.nu[l])) throw MomentError(fmt::format("non-finite nu at ell={}", l));
  }
  t.f[depth] = f_of(depth);

  t.T.resize(depth + 1);
  for (int l = 0; l <= depth; ++l) {
    t.T[l].resize(n);
    for (std::size_t i = 0; i < n; ++i) t.T[l][i] = Eigen::MatrixXcd::Constant(1, 1, T[l][i]);
  }
  fill_eig_moments(t);
  return t;
}

}  // namespace

SystemEnsemble SystemEnsemble::equal_power(double load, double n0, bool uniform_delay) {
  SystemEnsemble e;
  e.load = load;
  e.n0 = n0;
  e.atoms = {PowerDelayAtom{1.0, 0.0, 1.0}};
  e.uniform_delay = uniform_delay;
  return e;
}

double SystemEnsemble::power_moment(int s) const {
  double acc = 0.0;
  for (const auto& a : atoms) acc += a.prob * std::pow(a.power, s);
  return acc;
}

void SystemEnsemble::validate(double chip_interval) const {
  if (!(load > 0.0)) throw std::invalid_argument("ensemble: load must be positive");
  if (!(n0 >= 0.0)) throw std::invalid_argument("ensemble: noise level must be non-negative");
  if (atoms.empty()) throw std::invalid_argument("ensemble: at least one power/delay atom required");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.power >= 0.0) || !std::isfinite(a.power))
      throw std::invalid_argument("ensemble: atom powers must be finite and >= 0");
    if (!(a.delay >= 0.0 && a.delay < chip_interval))
      throw std::invalid_argument("ensemble: atom delays must lie in [0, T_c)");
    if (!(a.prob >= 0.0)) throw std::invalid_argument("ensemble: atom probabilities must be >= 0");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument(fmt::format("ensemble: atom probabilities sum to {:.15g}, not 1", total));
}

double noise_variance(double n0, const ChipPulse& pulse) {
  const double tc = pulse.chip_interval();
  return pulse.is_type_a() ? n0 * pulse.oversampling() / tc : n0 / tc;
}

double noise_variance(const SystemEnsemble& ensemble, const ChipPulse& pulse) {
  return noise_variance(ensemble.n0, pulse);
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Theorem1: return "Theorem1";
    case Provenance::Corollary1: return "Corollary1";
    case Provenance::Theorem2: return "Theorem2";
    case Provenance::Algorithm1: return "Algorithm1";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::Theorem1, Provenance::Corollary1, Provenance::Theorem2,
                 Provenance::Algorithm1}) {
    if (s == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

const char* to_string(ClassRole r) {
  switch (r) {
    case ClassRole::Atom: return "atom";
    case ClassRole::DelayNode: return "delay-node";
    case ClassRole::Probe: return "probe";
  }
  return "?";
}

namespace {
ClassRole role_from_string(const std::string& s) {
  for (auto r : {ClassRole::Atom, ClassRole::DelayNode, ClassRole::Probe}) {
    if (s == to_string(r)) return r;
  }
  throw std::invalid_argument("unknown class role '" + s + "'");
}
}  // namespace

std::size_t MomentTable::atom_count() const {
  return static_cast<std::size_t>(std::count_if(
      classes.begin(), classes.end(), [](const UserClass& c) { return c.role == ClassRole::Atom; }));
}

std::vector<double> MomentTable::moments(int n) const {
  if (n > depth) throw std::out_of_range(fmt::format("moment table has depth {}, asked for {}", depth, n));
  return {eig_moments.begin() + 1, eig_moments.begin() + 1 + n};
}

void MomentTable::write(std::ostream& os) const {
  os << "# acdma moment table\n";
  os << fmt::format("# provenance: {}\n", to_string(provenance));
  os << fmt::format("# depth: {}\n", depth);
  os << fmt::format("# load: {:.17g}\n", load);
  os << fmt::format("# oversampling: {}\n", oversampling);
  os << fmt::format("# chip_interval: {:.17g}\n", chip_interval);
  os << "ell,class,role,lambda,tau,weight,R\n";
  for (int l = 0; l <= depth; ++l) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto& k = classes[c];
      os << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", l, c, to_string(k.role), k.power,
                        k.delay, k.weight, R[c][l]);
    }
  }
  os << "\nell,m\n";
  for (int l = 0; l <= depth; ++l) os << fmt::format("{},{:.17g}\n", l, eig_moments[l]);
}

MomentTable MomentTable::read(std::istream& is) {
  MomentTable t;
  std::string line;
  enum { Header, Classes, Moments } section = Header;
  const auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      key.erase(0, key.find_first_not_of(' '));
      value.erase(0, value.find_first_not_of(' '));
      if (key == "provenance") t.provenance = provenance_from_string(value);
      else if (key == "depth") t.depth = std::stoi(value);
      else if (key == "load") t.load = std::stod(value);
      else if (key == "oversampling") t.oversampling = std::stoi(value);
      else if (key == "chip_interval") t.chip_interval = std::stod(value);
      continue;
    }
    if (line.rfind("ell,class", 0) == 0) {
      section = Classes;
      t.eig_moments.assign(t.depth + 1, 0.0);
      continue;
    }
    if (line.rfind("ell,m", 0) == 0) {
      section = Moments;
      continue;
    }
    const auto cells = split(line);
    try {
      if (section == Classes && cells.size() == 7) {
        const int l = std::stoi(cells[0]);
        const auto c = static_cast<std::size_t>(std::stoul(cells[1]));
        if (c >= t.classes.size()) {
          t.classes.resize(c + 1);
          t.R.resize(c + 1, std::vector<double>(t.depth + 1, 0.0));
        }
        t.classes[c] = {std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5]),
                        role_from_string(cells[2])};
        t.R.at(c).at(l) = std::stod(cells[6]);
      } else if (section == Moments && cells.size() == 2) {
        t.eig_moments.at(std::stoi(cells[0])) = std::stod(cells[1]);
      } else {
        throw std::invalid_argument("unexpected row");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("moment table line {}: {}", lineno, e.what()));
    }
  }
  return t;
}

MomentTable theorem1_recursion(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth,
                               const RecursionOptions& opts) {
  check_depth(depth);
  const double tc = pulse.chip_interval();
  ensemble.validate(tc);
  if (opts.grid_size < 64) throw std::invalid_argument("theorem 1: grid_size must be >= 64");
  const int r = pulse.oversampling();

  MomentTable t = make_table(Provenance::Theorem1, ensemble, pulse, depth);
  t.classes = atom_classes(ensemble, !ensemble.uniform_delay);
  if (ensemble.uniform_delay) {
    if (opts.delay_nodes < 1) throw std::invalid_argument("theorem 1: delay_nodes must be >= 1");
    const auto tau = gauss_legendre(opts.delay_nodes, 0.0, tc);
    for (const auto& a : ensemble.atoms) {
      for (std::size_t i = 0; i < tau.size(); ++i)
        t.classes.push_back({a.power, tau.nodes[i], a.prob * tau.weights[i] / tc, ClassRole::DelayNode});
    }
  }
  append_probes(t.classes, opts);

  QuadratureRule rule;
  if (opts.rule == FrequencyRule::PeriodicTrapezoid) {
    rule = periodic_trapezoid(opts.grid_size, -kPi, kPi);
  } else {
    rule = gauss_legendre_panels(folded_breakpoints(pulse), opts.grid_size);
  }
  t.grid = rule.nodes;
  t.grid_weights = rule.weights;
  const std::size_t n = rule.size();
  const std::size_t nc = t.classes.size();

  // Delta vectors of every class at every frequency node.
  std::vector<Eigen::MatrixXcd> D(nc, Eigen::MatrixXcd(r, n));
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < n; ++i) D[c].col(i) = delta_vector(pulse, rule.nodes[i], t.classes[c].delay);
  }

  t.R.assign(nc, std::vector<double>(depth + 1, 0.0));
  for (auto& row : t.R) row[0] = 1.0;
  t.T.assign(depth + 1, std::vector<Eigen::MatrixXcd>(n));
  for (std::size_t i = 0; i < n; ++i) t.T[0][i] = Eigen::MatrixXcd::Identity(r, r);

  std::vector<std::vector<double>> G;                // G[m][c] = g(T_m, class c)
  std::vector<std::vector<Eigen::MatrixXcd>> F;      // F[m][i] = f(R_m, W_i)

  const auto g_of = [&](int m) {
    std::vector<double> out(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto d = D[c].col(i);
        acc += rule.weights[i] * std::real(d.dot(t.T[m][i] * d));
      }
      out[c] = t.classes[c].power / kTwoPi * acc;
    }
    return out;
  };
  const auto f_of = [&](int m) {
    std::vector<Eigen::MatrixXcd> out(n, Eigen::MatrixXcd::Zero(r, r));
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& k = t.classes[c];
      if (k.weight == 0.0) continue;
      const double s = ensemble.load * k.weight * k.power * t.R[c][m];
      if (s == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const auto d = D[c].col(i);
        out[i].noalias() += s * (d * d.adjoint());
      }
    }
    return out;
  };

  for (int l = 1; l <= depth; ++l) {
    G.push_back(g_of(l - 1));
    for (std::size_t c = 0; c < nc; ++c) {
      double acc = 0.0;
      for (int s = 0; s < l; ++s) acc += G[l - s - 1][c] * t.R[c][s];
      check_finite(acc, l, t.classes[c], "R");
      t.R[c][l] = acc;
    }
    F.push_back(f_of(l - 1));
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(r, r);
      for (int s = 0; s < l; ++s) acc.noalias() += F[l - s - 1][i] * t.T[s][i];
      // Products of commuting Hermitian factors; symmetrize away rounding.
      t.T[l][i] = 0.5 * (acc + acc.adjoint());
      if (!t.T[l][i].allFinite()) throw MomentError(fmt::format("non-finite T at ell={}", l));
    }
  }
  fill_eig_moments(t);
  return t;
}

MomentTable corollary1_recursion(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth,
                                 const RecursionOptions& opts) {
  check_depth(depth);
  const double tc = pulse.chip_interval();
  ensemble.validate(tc);
  if (!ensemble.uniform_delay)
    throw std::invalid_argument("corollary 1 recursion requires uniformly distributed delays");
  if (!pulse.is_type_a()) throw std::invalid_argument("corollary 1 recursion requires front end A");
  const double r = pulse.oversampling();
  return scalar_recursion(Provenance::Corollary1, ensemble, pulse, depth, opts, 1.0,
                          r / (kTwoPi * tc), 1.0, ensemble.load);
}

MomentTable theorem2_recursion(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth,
                               const RecursionOptions& opts) {
  check_depth(depth);
  const double tc = pulse.chip_interval();
  ensemble.validate(tc);
  if (!pulse.is_type_a()) throw std::invalid_argument("theorem 2 recursion requires front end A");
  if (pulse.bandwidth() > 1.0 / (2.0 * tc) * (1.0 + 1e-12)) {
    throw std::invalid_argument(fmt::format(
        "theorem 2 recursion requires bandwidth <= 1/(2 T_c) = {:.6g}, pulse has {:.6g}",
        1.0 / (2.0 * tc), pulse.bandwidth()));
  }
  const double r = pulse.oversampling();
  return scalar_recursion(Provenance::Theorem2, ensemble, pulse, depth, opts, tc / r,
                          r * r / (kTwoPi * tc * tc), ensemble.load, 1.0);
}

double evaluate(const Polynomial& p, double x) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double substitute_monomials(const Polynomial& p, std::span<const double> values) {
  if (p.empty()) return 0.0;
  if (p.size() - 1 > values.size())
    throw std::invalid_argument(fmt::format("substitution needs {} values, got {}", p.size() - 1, values.size()));
  double acc = p[0];
  for (std::size_t k = 1; k < p.size(); ++k) acc += p[k] * values[k - 1];
  return acc;
}

MomentPolynomials algorithm1_polynomials(double load, int r, double chip_interval,
                                         std::span<const double> energy,
                                         std::span<const double> power_moments, int depth) {
  check_depth(depth);
  if (depth > kAlgorithm1MaxDepth)
    throw MomentError(fmt::format("algorithm 1 depth {} exceeds the supported maximum {}", depth,
                                  kAlgorithm1MaxDepth));
  if (static_cast<int>(energy.size()) < depth || static_cast<int>(power_moments.size()) < depth)
    throw std::invalid_argument(fmt::format("algorithm 1 at depth {} needs {} energy coefficients and power moments",
                                            depth, depth));
  MomentPolynomials mp;
  for (int s = 0; s < depth; ++s) mp.energy_over_tc.push_back(energy[s] / chip_interval);
  mp.power_moments.assign(power_moments.begin(), power_moments.begin() + depth);
  mp.rho = {Polynomial{1.0}};
  mp.mu = {Polynomial{1.0}};
  const double scale = r / chip_interval;

  for (int l = 1; l <= depth; ++l) {
    const int m = l - 1;
    Polynomial u(mp.mu[m].size() + 1, 0.0);
    for (std::size_t k = 0; k < mp.mu[m].size(); ++k) u[k + 1] = r * mp.mu[m][k];
    mp.U.push_back(substitute_monomials(u, mp.energy_over_tc));
    Polynomial v(mp.rho[m].size() + 1, 0.0);
    for (std::size_t k = 0; k < mp.rho[m].size(); ++k) v[k + 1] = mp.rho[m][k];
    mp.V.push_back(substitute_monomials(v, mp.power_moments));

    Polynomial rho(l + 1, 0.0);
    Polynomial mu(l + 1, 0.0);
    for (int s = 0; s < l; ++s) {
      for (std::size_t k = 0; k < mp.rho[s].size(); ++k) rho[k + 1] += mp.U[l - s - 1] * mp.rho[s][k];
      for (std::size_t k = 0; k < mp.mu[s].size(); ++k) mu[k + 1] += scale * load * mp.V[l - s - 1] * mp.mu[s][k];
    }
    for (double c : rho)
      if (!std::isfinite(c)) throw MomentError(fmt::format("non-finite polynomial coefficient at ell={}", l));
    mp.rho.push_back(std::move(rho));
    mp.mu.push_back(std::move(mu));
  }
  return mp;
}

Algorithm1Result algorithm1(const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth) {
  check_depth(depth);
  const double tc = pulse.chip_interval();
  ensemble.validate(tc);
  if (!pulse.is_type_a()) throw std::invalid_argument("algorithm 1 requires front end A");
  if (!ensemble.uniform_delay && pulse.bandwidth() > 1.0 / (2.0 * tc) * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "algorithm 1 requires uniformly distributed delays or bandwidth <= 1/(2 T_c)");
  }
  std::vector<double> energy, pm;
  for (int s = 1; s <= depth; ++s) {
    energy.push_back(energy_coefficient(pulse, s).value);
    pm.push_back(ensemble.power_moment(s));
  }
  Algorithm1Result out;
  out.polynomials = algorithm1_polynomials(ensemble.load, pulse.oversampling(), tc, energy, pm, depth);
  const auto& poly = out.polynomials;

  MomentTable& t = out.table;
  t = make_table(Provenance::Algorithm1, ensemble, pulse, depth);
  t.classes = atom_classes(ensemble, true);
  t.R.assign(t.classes.size(), std::vector<double>(depth + 1, 0.0));
  for (std::size_t c = 0; c < t.classes.size(); ++c) {
    for (int l = 0; l <= depth; ++l) t.R[c][l] = evaluate(poly.rho[l], t.classes[c].power);
  }
  t.eig_moments.assign(depth + 1, 1.0);
  for (int l = 1; l <= depth; ++l) t.eig_moments[l] = substitute_monomials(poly.rho[l], poly.power_moments);
  t.nu = poly.U;
  t.f = poly.V;
  return out;
}

std::array<double, 5> closed_form_moments(double b, int r, double tc, std::span<const double, 5> E,
                                          std::span<const double, 5> m) {
  const double E1 = E[0], E2 = E[1], E3 = E[2], E4 = E[3], E5 = E[4];
  const double m1 = m[0], m2 = m[1], m3 = m[2], m4 = m[3], m5 = m[4];
  const double k = r / tc;
  std::array<double, 5> out{};
  out[0] = k * m1 * E1;
  out[1] = std::pow(k, 2) * (b * m1 * m1 * E2 + m2 * E1 * E1);
  out[2] = std::pow(k, 3) * (b * b * E3 * std::pow(m1, 3) + 3 * m2 * E2 * b * m1 * E1 + m3 * std::pow(E1, 3));
  out[3] = std::pow(k, 4) *
           (2 * b * b * E2 * E2 * m2 * m1 * m1 + 4 * b * E1 * E1 * E2 * m3 * m1 +
            4 * b * b * E1 * E3 * m2 * m1 * m1 + b * b * b * E4 * std::pow(m1, 4) +
            2 * b * E1 * E1 * E2 * m2 * m2 + std::pow(E1, 4) * m4);
  out[4] = std::pow(k, 5) *
           (m5 * std::pow(E1, 5) + std::pow(b, 4) * E5 * std::pow(m1, 5) +
            5 * std::pow(b, 3) * E1 * E4 * m2 * std::pow(m1, 3) +
            5 * std::pow(b, 3) * E3 * E2 * m2 * std::pow(m1, 3) +
            5 * b * b * E3 * E1 * E1 * m3 * m1 * m1 + 5 * b * b * E1 * E1 * E3 * m2 * m2 * m1 +
            5 * b * b * E1 * E2 * E2 * m2 * m2 * m1 + 5 * b * b * E2 * E2 * E1 * m3 * m1 * m1 +
            5 * b * E2 * std::pow(E1, 3) * m4 * m1 + 5 * b * E2 * std::pow(E1, 3) * m3 * m2);
  return out;
}

std::array<double, 5> closed_form_moments(const SystemEnsemble& ensemble, const ChipPulse& pulse) {
  std::array<double, 5> E{}, m{};
  for (int s = 1; s <= 5; ++s) {
    E[s - 1] = energy_coefficient(pulse, s).value;
    m[s - 1] = ensemble.power_moment(s);
  }
  return closed_form_moments(ensemble.load, pulse.oversampling(), pulse.chip_interval(), E, m);
}

double mp_moment_oracle(double beta, int order) {
  if (order < 1) throw std::invalid_argument("mp_moment_oracle: order must be >= 1");
  const auto binom = [](int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
  };
  double acc = 0.0;
  for (int i = 0; i < order; ++i) acc += binom(order, i) * binom(order, i + 1) * std::pow(beta, i);
  return acc / order;
}

}  // namespace acdma
