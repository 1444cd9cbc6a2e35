#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rig/model.hpp"
#include "rig/stats.hpp"

namespace rig {

/// Resolved run configuration for one subcommand.  Every field is explicit in
/// the echo, so a report's embedded config reproduces the run byte-exactly.
struct ExperimentConfig {
  std::string subcommand;

  double a = 1.0;
  double b = 4.0;
  std::string tau_name = "linear";
  double nu = 2.0;
  std::string x_dist = "constant(1)";
  std::string y_dist = "constant(1)";
  std::string x_values, y_values;  // comma lists of realized weights (win over dists)
  std::int64_t x_first = 1, y_first = 1;

  std::int64_t t = 0, s = 0, u = 0, t_max = 0;
  std::int64_t n_rep = 0;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;
  double budget_seconds = 0.0;
  std::string backend = "envelope-skip";
  std::string out_dir = ".";
  bool out_json = true;
  bool out_csv = true;
  int r_max = 48;
  bool gamma_star = false;

  std::string sweep_experiment;
  std::vector<double> sweep_scales;

  /// Parse-time notices (e.g. realized weights overriding a distribution).
  std::vector<std::string> warnings;

  ModelParams model() const;
  WeightSetup weight_setup() const;
  GenBackend gen_backend() const;
  McOptions mc_options() const;
  nlohmann::json echo() const;
};

/// Command-line overrides applied on top of the config file.
struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<double> budget_seconds;
  std::vector<std::string> sets;  // "key=value" or "section.key=value"
};

/// Parses the flat key-value config text (global keys plus one [section] per
/// subcommand), applies overrides, resolves RIG_LAB_THREADS, validates.
/// Unknown keys and violated parameter constraints are errors.
ExperimentConfig parse_config(const std::string& subcommand, const std::string& config_text,
                              const FlagOverrides& flags);

/// Same, reading the file at config_path ("" = defaults only).
ExperimentConfig parse_config_file(const std::string& subcommand, const std::string& config_path,
                                   const FlagOverrides& flags);

/// Rebuilds a configuration from a report's embedded echo.
ExperimentConfig config_from_echo(const nlohmann::json& echo);

}  // namespace rig
