#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lodll/analysis.hpp"
#include "lodll/coefficients.hpp"
#include "lodll/stepper.hpp"

namespace lodll {

enum class Experiment { elliptic_convergence, localization_decay, ll_convergence, ll_run, cross_section };

std::string to_string(Experiment e);
/// Accepts both `ll_run` and `ll-run` spellings.
Experiment parse_experiment(const std::string& name);

enum class RunSpace { fine, lod };

struct ExperimentConfig {
  Experiment experiment = Experiment::ll_convergence;
  bool experiment_set = false;

  CoefficientField kappa;
  double alpha = 1.0;
  double tau = 1e-3;
  double final_time = 0.1;

  std::vector<std::size_t> coarse = {2, 4, 8};  // H = 1 / coarse[i]
  std::size_t fine_n = 0;  // 0: 16 times the finest coarse count
  std::size_t layers = kAutoLayers;
  std::vector<std::size_t> layer_list = {1, 2, 3, 4};

  Scheme scheme = Scheme::cimrak;
  InitialData initial = InitialData::example1;
  bool example1_forcing = true;
  std::size_t reference_n = 0;  // 0: same as fine_n

  RunSpace run_space = RunSpace::lod;
  std::size_t stride = 1;
  std::size_t samples = 129;
  double section = 0.5;

  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;  // empty: <output_dir>/cache

  std::size_t effective_fine_n() const;
  std::size_t effective_reference_n() const { return reference_n == 0 ? effective_fine_n() : reference_n; }
  std::filesystem::path effective_cache_dir() const;
  std::size_t num_steps() const;
};

/// Ordered key=value pairs.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Every accepted key, in serialization order.
const std::vector<std::string>& config_keys();

/// Parses `key=value` lines; `#` starts a comment.  Malformed lines throw a
/// config Error naming the line.
ConfigEntries parse_config_text(const std::string& text, const std::string& origin = "config");
ConfigEntries read_config_file(const std::filesystem::path& path);

/// Sets one key.  Unknown keys and malformed values throw a config Error
/// naming the key.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void apply_entries(ExperimentConfig& cfg, const ConfigEntries& entries);

std::vector<std::string> preset_names();
const ConfigEntries& preset_entries(const std::string& name);
void apply_preset(ExperimentConfig& cfg, const std::string& name);

/// Checks invariants and required keys; errors name the offending key.
void validate(const ExperimentConfig& cfg);

/// Canonical text form; parse_config(to_text(c)) reproduces c exactly.
std::string to_text(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& text);

/// Layering used by the command line: defaults, then preset, then file, then
/// explicit overrides.  The result is validated.
ExperimentConfig resolve_config(const std::string& preset, const std::filesystem::path& file,
                                const ConfigEntries& overrides);

}  // namespace lodll
