#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adpo/runner.hpp"

namespace adpo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Missing or unreadable config file.
struct ConfigFileError : ConfigError {
  using ConfigError::ConfigError;
};
// Structurally malformed document.
struct ConfigParseError : ConfigError {
  using ConfigError::ConfigError;
};
// A key the schema does not define; typos are hard errors.
struct UnknownKeyError : ConfigError {
  using ConfigError::ConfigError;
};
// Wrong type or out-of-range value.
struct ConfigValueError : ConfigError {
  using ConfigError::ConfigError;
};

struct ExperimentConfig {
  std::string experiment = "grid";
  std::vector<std::string> scenarios;  // resolved ids
  std::vector<std::string> methods;    // resolved ids
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int workers = 1;
  std::string output_dir = "output";
  bool strict = false;

  TrainConfig train;

  // Method-level overrides applied on top of MethodSpec::make defaults.
  double beta = 1.0;
  double beta_r = 1.0;
  double tau = 1.0;
  std::optional<int> pretrain_steps;
  std::optional<std::string> anchor_kind;
  std::optional<int> update_period;

  std::vector<ScenarioSpec> scenario_specs() const;
  std::vector<MethodSpec> method_specs() const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parse a JSON document (text) with defaults filled in. Unknown keys,
// malformed documents, and out-of-range values raise distinct error classes.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Full round-trip emission: parse(emit(config)) == config.
std::string emit_config(const ExperimentConfig& config);

// `a..b` inclusive ranges or comma-separated integers.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

// Scenario selector: an id, a family name (expands to 3 severities), or
// "all" (the 12-scenario grid).
std::vector<std::string> expand_scenarios(const std::vector<std::string>& items);
std::vector<std::string> expand_methods(const std::vector<std::string>& items);

std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace adpo
