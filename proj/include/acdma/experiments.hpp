#pragma once

// Experiment drivers shared by the command-line tool and the bindings:
// moment tables from several engines, SINR sweeps along one parameter axis, and
// Monte Carlo comparisons of finite systems against the asymptotic values.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acdma/detector.hpp"
#include "acdma/finite_sim.hpp"
#include "acdma/moments.hpp"
#include "acdma/pulse.hpp"

namespace acdma {

// ---- moments ---------------------------------------------------------------

struct MomentsSpec {
  ChipPulse pulse = ChipPulse::sinc(1.0, 1.0, FrontEnd::type_a(1));
  SystemEnsemble ensemble;
  int depth = 6;
  // Empty means every engine whose preconditions hold.
  std::vector<Provenance> engines;
  RecursionOptions options;
};

struct MomentRow {
  Provenance engine = Provenance::Theorem1;
  int ell = 1;
  std::size_t cls = 0;
  ClassRole role = ClassRole::Atom;
  double power = 1.0;
  double delay = 0.0;
  double R = 0.0;
  double m = 0.0;
};

// Whether an engine accepts this pulse/ensemble pair.
bool engine_applies(Provenance engine, const SystemEnsemble& ensemble, const ChipPulse& pulse, int depth);
MomentTable run_engine(Provenance engine, const SystemEnsemble& ensemble, const ChipPulse& pulse,
                       int depth, const RecursionOptions& opts = {});

// Rows for atom and probe classes, engine by engine, ell ascending.
std::vector<MomentRow> run_moments(const MomentsSpec& spec);
void write_moment_csv(std::ostream& os, const std::vector<MomentRow>& rows);
// Largest relative spread of R between engines over matching (ell, class) rows.
double engine_spread(const std::vector<MomentRow>& rows);

// ---- SINR sweeps -------------------------------------------------------------

enum class Scenario { Sync, AsyncA, AsyncB };
enum class PulseKind { Sinc, RootRaisedCosine };
enum class SweepAxis { Bandwidth, Load, Rolloff, Snr };

const char* to_string(Scenario s);
const char* to_string(PulseKind p);
const char* to_string(SweepAxis a);
Scenario scenario_from_string(const std::string& s);
PulseKind pulse_kind_from_string(const std::string& s);
SweepAxis sweep_axis_from_string(const std::string& s);

// Smallest r with B <= r / (2 T_c).
int minimal_oversampling(double bandwidth, double chip_interval);

// One operating point. Equal received powers, SNR = 1 / N0.
//  Sync:   all delays zero, front end A at the minimal r.
//  AsyncA: uniform delays, front end A at the minimal r.
//  AsyncB: uniform delays, chip-matched front end sampled at the delay of
//          the user of interest (root-raised-cosine chips only).
struct ScenarioPoint {
  Scenario scenario = Scenario::AsyncA;
  PulseKind pulse = PulseKind::Sinc;
  double bandwidth = 0.5;  // B T_c
  double load = 0.5;
  double snr_db = 10.0;
  int rank = 4;
  double chip_interval = 1.0;
  SolveOptions solve;
  RecursionOptions recursion;
};

// gamma = 2 B T_c for sinc chips, rolloff = 2 B T_c - 1 for root-raised-cosine.
double pulse_shape_parameter(PulseKind pulse, double bandwidth);
ChipPulse scenario_pulse(const ScenarioPoint& p);

struct ScenarioResult {
  int oversampling = 1;
  Provenance engine = Provenance::Theorem1;
  double noise_variance = 0.0;
  std::size_t cls = 0;
  MomentTable table;
  DetectorDesign design;
};

ScenarioResult evaluate_scenario(const ScenarioPoint& point);

struct Curve {
  Scenario scenario = Scenario::AsyncA;
  PulseKind pulse = PulseKind::Sinc;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::Bandwidth;
  std::vector<double> grid;
  std::vector<Curve> curves;
  // Fixed parameters; each list is swept as an inner loop. The axis
  // parameter, if present here, is ignored.
  std::vector<double> bandwidth{0.5};
  std::vector<double> load{0.5};
  std::vector<double> snr_db{10.0};
  std::vector<int> rank{4};
  double chip_interval = 1.0;
  SolveOptions solve;
  RecursionOptions recursion;

  void validate() const;
};

struct SweepRow {
  double value = 0.0;
  Curve curve;
  double bandwidth = 0.0;
  double shape = 0.0;
  int oversampling = 1;
  double load = 0.0;
  double snr_db = 0.0;
  int rank = 1;
  double sinr = 0.0;
};

// Rows in axis order, then curve, bandwidth, load, SNR, rank order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs = 1);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// ---- Monte Carlo -------------------------------------------------------------

struct MonteCarloSinr {
  int rank = 3;
  int trials = 2000;
  int batches = 20;
};

struct MonteCarloSpec {
  FiniteSystemConfig system;
  int seeds = 20;
  int depth = 4;
  double gate_pct = 3.0;
  std::optional<MonteCarloSinr> sinr;
  SolveOptions solve;
  RecursionOptions recursion;

  void validate() const;
};

// seed < 0 marks a row pooled over all seeds.
struct MonteCarloRow {
  long seed = -1;
  std::string quantity;
  double power = 1.0;
  double empirical = 0.0;
  double asymptotic = 0.0;
  double rel_error = 0.0;
  double variance = 0.0;  // sample variance of the per-user values
  double ci_low = 0.0;    // 95% interval of the empirical value
  double ci_high = 0.0;
  long samples = 0;
};

struct MonteCarloReport {
  std::vector<MonteCarloRow> rows;
  bool passed = true;  // every pooled rel_error within the gate
};

// The large-system reference for a finite configuration: power atoms of the
// configuration, uniform or synchronous delays.
MomentTable asymptotic_reference(const FiniteSystemConfig& config, int depth,
                                 const RecursionOptions& opts = {});

MonteCarloReport run_montecarlo(const MonteCarloSpec& spec, int jobs = 1);
void write_montecarlo_csv(std::ostream& os, const std::vector<MonteCarloRow>& rows);

}  // namespace acdma
