// Python bindings: pulses, moment engines, detector design, parameter sweeps and
// the YAML experiment runners.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "acdma/detector.hpp"
#include "acdma/experiments.hpp"
#include "acdma/finite_sim.hpp"
#include "acdma/moments.hpp"
#include "acdma/pulse.hpp"
#include "config.hpp"

namespace py = pybind11;
using namespace acdma;

namespace {

FrontEnd front_end(const std::string& kind, int oversampling) {
  if (kind == "A") return FrontEnd::type_a(oversampling);
  if (kind == "B") return FrontEnd::type_b();
  throw std::invalid_argument("front_end must be 'A' or 'B'");
}

py::dict sweep_row(const SweepRow& r) {
  py::dict d;
  d["value"] = r.value;
  d["scenario"] = to_string(r.curve.scenario);
  d["pulse"] = to_string(r.curve.pulse);
  d["bandwidth"] = r.bandwidth;
  d["shape"] = r.shape;
  d["oversampling"] = r.oversampling;
  d["load"] = r.load;
  d["snr_db"] = r.snr_db;
  d["L"] = r.rank;
  d["sinr"] = r.sinr;
  d["sinr_db"] = to_db(r.sinr);
  return d;
}

py::dict moment_row(const MomentRow& r) {
  py::dict d;
  d["engine"] = to_string(r.engine);
  d["ell"] = r.ell;
  d["class"] = r.cls;
  d["role"] = to_string(r.role);
  d["lambda"] = r.power;
  d["tau"] = r.delay;
  d["R"] = r.R;
  d["m"] = r.m;
  return d;
}

py::dict montecarlo_row(const MonteCarloRow& r) {
  py::dict d;
  d["seed"] = r.seed < 0 ? py::object(py::str("all")) : py::object(py::int_(r.seed));
  d["quantity"] = r.quantity;
  d["power"] = r.power;
  d["samples"] = r.samples;
  d["empirical"] = r.empirical;
  d["asymptotic"] = r.asymptotic;
  d["rel_error"] = r.rel_error;
  d["variance"] = r.variance;
  d["ci_low"] = r.ci_low;
  d["ci_high"] = r.ci_high;
  return d;
}

}  // namespace

PYBIND11_MODULE(_acdma, m) {
  m.doc() = "Large-system moments and multistage detector SINR for asynchronous CDMA";

  py::register_exception<MomentError>(m, "MomentError", PyExc_RuntimeError);
  py::register_exception<DetectorError>(m, "DetectorError", PyExc_RuntimeError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<config::ConfigError>(m, "ConfigError", PyExc_ValueError);

  // ---- pulses
  py::class_<ChipPulse>(m, "ChipPulse")
      .def_static(
          "sinc",
          [](double gamma, double tc, const std::string& fe, int r) {
            return ChipPulse::sinc(gamma, tc, front_end(fe, r));
          },
          py::arg("gamma"), py::arg("chip_interval") = 1.0, py::arg("front_end") = "A", py::arg("oversampling") = 1)
      .def_static(
          "root_raised_cosine",
          [](double a, double tc, const std::string& fe, int r) {
            return ChipPulse::root_raised_cosine(a, tc, front_end(fe, r));
          },
          py::arg("rolloff"), py::arg("chip_interval") = 1.0, py::arg("front_end") = "A",
          py::arg("oversampling") = 1)
      .def_static(
          "load_tabulated",
          [](const std::filesystem::path& path, double tc, const std::string& fe, int r, std::size_t res) {
            return ChipPulse::load_tabulated(path, tc, front_end(fe, r), res);
          },
          py::arg("path"), py::arg("chip_interval") = 1.0, py::arg("front_end") = "A", py::arg("oversampling") = 1,
          py::arg("resolution") = 4096)
      .def_property_readonly("chip_interval", &ChipPulse::chip_interval)
      .def_property_readonly("oversampling", &ChipPulse::oversampling)
      .def_property_readonly("is_type_a", &ChipPulse::is_type_a)
      .def_property_readonly("bandwidth", &ChipPulse::bandwidth)
      .def("spectrum", &ChipPulse::spectrum, py::arg("omega"))
      .def("transmit_spectrum", &ChipPulse::transmit_spectrum, py::arg("omega"));

  m.def(
      "energy_coefficient", [](const ChipPulse& p, int s) { return energy_coefficient(p, s).value; },
      py::arg("pulse"), py::arg("s"));
  m.def("folded_transform", &folded_transform, py::arg("pulse"), py::arg("omega"), py::arg("tau"));

  // ---- moments
  py::class_<PowerDelayAtom>(m, "PowerDelayAtom")
      .def(py::init([](double power, double delay, double prob) { return PowerDelayAtom{power, delay, prob}; }),
           py::arg("power") = 1.0, py::arg("delay") = 0.0, py::arg("prob") = 1.0)
      .def_readwrite("power", &PowerDelayAtom::power)
      .def_readwrite("delay", &PowerDelayAtom::delay)
      .def_readwrite("prob", &PowerDelayAtom::prob);

  py::class_<SystemEnsemble>(m, "SystemEnsemble")
      .def(py::init([](double load, double n0, std::vector<PowerDelayAtom> atoms, bool uniform) {
             SystemEnsemble e;
             e.load = load;
             e.n0 = n0;
             if (!atoms.empty()) e.atoms = std::move(atoms);
             e.uniform_delay = uniform;
             return e;
           }),
           py::arg("load") = 0.5, py::arg("n0") = 0.1, py::arg("atoms") = std::vector<PowerDelayAtom>{},
           py::arg("uniform_delay") = false)
      .def_readwrite("load", &SystemEnsemble::load)
      .def_readwrite("n0", &SystemEnsemble::n0)
      .def_readwrite("atoms", &SystemEnsemble::atoms)
      .def_readwrite("uniform_delay", &SystemEnsemble::uniform_delay)
      .def("validate", &SystemEnsemble::validate, py::arg("chip_interval") = 1.0);

  m.def("noise_variance", py::overload_cast<const SystemEnsemble&, const ChipPulse&>(&noise_variance),
        py::arg("ensemble"), py::arg("pulse"));

  py::class_<RecursionOptions>(m, "RecursionOptions")
      .def(py::init<>())
      .def_readwrite("grid_size", &RecursionOptions::grid_size)
      .def_readwrite("delay_nodes", &RecursionOptions::delay_nodes)
      .def_readwrite("probes", &RecursionOptions::probes);

  py::class_<MomentTable>(m, "MomentTable")
      .def_property_readonly("engine", [](const MomentTable& t) { return to_string(t.provenance); })
      .def_readonly("depth", &MomentTable::depth)
      .def_readonly("load", &MomentTable::load)
      .def_readonly("oversampling", &MomentTable::oversampling)
      .def_readonly("R", &MomentTable::R)
      .def_readonly("eig_moments", &MomentTable::eig_moments)
      .def_property_readonly("classes",
                             [](const MomentTable& t) {
                               py::list out;
                               for (const auto& c : t.classes)
                                 out.append(py::make_tuple(c.power, c.delay, c.weight, to_string(c.role)));
                               return out;
                             })
      .def_property_readonly("atom_count", &MomentTable::atom_count);

  m.def("theorem1", &theorem1_recursion, py::arg("ensemble"), py::arg("pulse"), py::arg("depth"),
        py::arg("options") = RecursionOptions{});
  m.def("corollary1", &corollary1_recursion, py::arg("ensemble"), py::arg("pulse"), py::arg("depth"),
        py::arg("options") = RecursionOptions{});
  m.def("theorem2", &theorem2_recursion, py::arg("ensemble"), py::arg("pulse"), py::arg("depth"),
        py::arg("options") = RecursionOptions{});
  m.def(
      "algorithm1", [](const SystemEnsemble& e, const ChipPulse& p, int depth) { return algorithm1(e, p, depth).table; },
      py::arg("ensemble"), py::arg("pulse"), py::arg("depth"));
  m.def("closed_form_moments", py::overload_cast<const SystemEnsemble&, const ChipPulse&>(&closed_form_moments),
        py::arg("ensemble"), py::arg("pulse"));
  m.def("mp_moment", &mp_moment_oracle, py::arg("load"), py::arg("order"));

  // ---- detector
  py::class_<SolveOptions>(m, "SolveOptions")
      .def(py::init([](bool ridge, double max_condition) {
             SolveOptions s;
             s.ridge = ridge;
             s.max_condition = max_condition;
             return s;
           }),
           py::arg("ridge") = false, py::arg("max_condition") = 1e12)
      .def_readwrite("ridge", &SolveOptions::ridge)
      .def_readwrite("max_condition", &SolveOptions::max_condition)
      .def_readwrite("ridge_scale", &SolveOptions::ridge_scale);

  py::class_<DetectorDesign>(m, "DetectorDesign")
      .def_readonly("rank", &DetectorDesign::rank)
      .def_readonly("weights", &DetectorDesign::weights)
      .def_readonly("xi_matrix", &DetectorDesign::xi_matrix)
      .def_readonly("xi_vector", &DetectorDesign::xi_vector)
      .def_readonly("sinr", &DetectorDesign::sinr)
      .def_property_readonly("sinr_db", &DetectorDesign::sinr_db);

  m.def("wiener_design", &wiener_design, py::arg("table"), py::arg("class_index"), py::arg("noise_variance"),
        py::arg("rank"), py::arg("options") = SolveOptions{});
  m.def("polynomial_expansion_design", &polynomial_expansion_design, py::arg("table"), py::arg("noise_variance"),
        py::arg("rank"), py::arg("options") = SolveOptions{});
  m.def("to_db", &to_db);
  m.def("from_db", &from_db);

  // ---- operating points
  m.def(
      "scenario_sinr",
      [](const std::string& scenario, const std::string& pulse, double bandwidth, double load, double snr_db,
         int rank, bool ridge) {
        ScenarioPoint p;
        p.scenario = scenario_from_string(scenario);
        p.pulse = pulse_kind_from_string(pulse);
        p.bandwidth = bandwidth;
        p.load = load;
        p.snr_db = snr_db;
        p.rank = rank;
        p.solve.ridge = ridge;
        return evaluate_scenario(p).design.sinr;
      },
      py::arg("scenario"), py::arg("pulse"), py::arg("bandwidth"), py::arg("load") = 0.5, py::arg("snr_db") = 10.0,
      py::arg("rank") = 4, py::arg("ridge") = false,
      "Wiener SINR (linear) of one operating point; bandwidth is B T_c.");

  // ---- config runners
  m.def(
      "run_moments_config",
      [](const std::filesystem::path& path, const std::string& engines) {
        auto spec = config::load_moments(path);
        if (!engines.empty()) spec.engines = config::parse_engines(engines);
        py::list out;
        for (const auto& r : run_moments(spec)) out.append(moment_row(r));
        return out;
      },
      py::arg("path"), py::arg("engines") = "");
  m.def(
      "run_sweep_config",
      [](const std::filesystem::path& path, int jobs) {
        const auto spec = config::load_sweep(path);
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(spec, jobs);
        }
        py::list out;
        for (const auto& r : rows) out.append(sweep_row(r));
        return out;
      },
      py::arg("path"), py::arg("jobs") = 1);
  m.def(
      "run_montecarlo_config",
      [](const std::filesystem::path& path, int jobs, std::optional<double> gate) {
        auto spec = config::load_montecarlo(path);
        if (gate) spec.gate_pct = *gate;
        MonteCarloReport report;
        {
          py::gil_scoped_release release;
          report = run_montecarlo(spec, jobs);
        }
        py::list out;
        for (const auto& r : report.rows) out.append(montecarlo_row(r));
        return py::make_tuple(out, report.passed);
      },
      py::arg("path"), py::arg("jobs") = 1, py::arg("gate") = std::nullopt);
}
