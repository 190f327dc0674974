// acdma: moment tables, SINR sweeps and Monte Carlo validation from YAML configs.
// Exit status: 0 success, 1 Monte Carlo gate failure, 2 configuration or
// runtime error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "acdma/experiments.hpp"
#include "acdma/parallel.hpp"
#include "config.hpp"

namespace {

constexpr int kGateFailure = 1;
constexpr int kError = 2;

template <class Write>
void emit(const std::string& out, Write&& write) {
  if (out.empty() || out == "-") {
    write(std::cout);
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot open output file '{}'", out));
  write(os);
  if (!os) throw std::runtime_error(fmt::format("failed writing '{}'", out));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-system moments and multistage detector SINR for asynchronous CDMA"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string engines;
  int jobs = 0;
  std::optional<double> gate;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output CSV path (stdout if omitted)");
    sub->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  };

  auto* moments = app.add_subcommand("moments", "Eigenvalue moment table from one or more engines");
  common(moments);
  moments->add_option("--engines", engines, "Comma-separated engines or 'all' (overrides the config)");

  auto* sweep = app.add_subcommand("sinr-sweep", "Multistage Wiener SINR along one parameter axis");
  common(sweep);

  auto* mc = app.add_subcommand("montecarlo", "Finite-system moments against the asymptotic values");
  common(mc);
  mc->add_option("--gate", gate, "Relative error gate in percent (overrides the config)")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (moments->parsed()) {
      auto spec = acdma::config::load_moments(config_path);
      if (!engines.empty()) {
        spec.engines = acdma::config::parse_engines(engines);
        for (auto e : spec.engines)
          if (!acdma::engine_applies(e, spec.ensemble, spec.pulse, spec.depth))
            throw std::invalid_argument(
                fmt::format("--engines: {} does not apply to this pulse and ensemble", acdma::to_string(e)));
      }
      const auto rows = acdma::run_moments(spec);
      emit(out, [&](std::ostream& os) { acdma::write_moment_csv(os, rows); });
      fmt::print(stderr, "engine spread (max relative): {:.3e}\n", acdma::engine_spread(rows));
      return 0;
    }
    if (sweep->parsed()) {
      const auto spec = acdma::config::load_sweep(config_path);
      const auto rows = acdma::run_sweep(spec, acdma::resolve_jobs(jobs));
      emit(out, [&](std::ostream& os) { acdma::write_sweep_csv(os, rows); });
      return 0;
    }
    auto spec = acdma::config::load_montecarlo(config_path);
    if (gate) spec.gate_pct = *gate;
    const auto report = acdma::run_montecarlo(spec, acdma::resolve_jobs(jobs));
    emit(out, [&](std::ostream& os) { acdma::write_montecarlo_csv(os, report.rows); });
    if (!report.passed) {
      fmt::print(stderr, "gate failed: a pooled relative error exceeds {}%\n", spec.gate_pct);
      return kGateFailure;
    }
    return 0;
  } catch (const acdma::config::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kError;
  }
}
