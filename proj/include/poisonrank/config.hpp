#pragma once

#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "poisonrank/harness.hpp"

namespace poisonrank {

// A sweep varies exactly one parameter over a grid, optionally for several
// strategies side by side (paired seeds, shared base spec).
struct SweepConfig {
  std::string param;  // one of: mu_target, delta0, x, epsilon
  std::vector<double> values;
  std::vector<AttackStrategy> strategies;  // defaults to {base.strategy}
  ExperimentSpec base;
};

struct LoadedConfig {
  enum class Mode { kRun, kSweep, kMulti };
  Mode mode = Mode::kRun;
  ExperimentSpec run;
  std::vector<SweepConfig> sweeps;  // one entry for kSweep, several for kMulti
};

// Strict parsers: unknown keys are rejected with ConfigError. Item ids and
// targets are 1-based in config files and outputs, 0-based internally.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

LoadedConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const LoadedConfig& cfg);

LoadedConfig load_config_file(const std::string& path);

// Preset scenarios. Names may be abbreviated to any unique prefix.
std::vector<std::string> preset_names();
LoadedConfig preset(const std::string& name);

// Applies one sweep grid point to a spec copy.
void apply_sweep_value(ExperimentSpec& spec, const std::string& param,
                       double value);

}  // namespace poisonrank
