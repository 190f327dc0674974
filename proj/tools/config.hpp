#pragma once

// YAML experiment configuration. Each subcommand reads its own top-level
// block (`moments`, `sweep`, `montecarlo`); see README.md for the schema.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "acdma/experiments.hpp"

namespace acdma::config {

// Message carries "file:line:col: field: problem".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MomentsSpec load_moments(const std::filesystem::path& path);
SweepSpec load_sweep(const std::filesystem::path& path);
MonteCarloSpec load_montecarlo(const std::filesystem::path& path);

// Comma-separated engine names, or "all".
std::vector<Provenance> parse_engines(const std::string& list);

}  // namespace acdma::config
