#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdsm/baselines/baselines.hpp"
#include "fdsm/coord/coordinator.hpp"
#include "fdsm/sim/scenario.hpp"

namespace fdsm {

enum class ExperimentKind { sweep, policy_table };
enum class TraceOutput { none, flagged, all };

// One experiment: a cartesian sweep over storage capacity and renewable
// uncertainty, every listed scheme simulated for every seed.
struct ExperimentConfig {
  std::string name = "custom";
  ExperimentKind kind = ExperimentKind::sweep;
  std::vector<StrategyKind> schemes{StrategyKind::centralized, StrategyKind::proposed, StrategyKind::lyapunov,
                                    StrategyKind::myopic};
  std::size_t seeds = 20;
  std::uint64_t first_seed = 1;
  std::size_t horizon = 24 * 60;
  bool skip_intractable = false;
  std::size_t state_limit = 100000;
  DriftForm drift = DriftForm::with_demand;
  bool prices = true;  // finite-difference LMPs of the proposed trace
  bool policy_table = false;
  TraceOutput traces = TraceOutput::flagged;  // per-run period traces
  std::size_t policy_aggregator = 0;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::string output;       // empty: output root / name

  // Base scenario; storage and uncertainty are overridden per sweep point.
  ScenarioSpec scenario;
  std::vector<double> storage_sweep{25.0};
  std::vector<double> storage_assignment;  // cyclic per-aggregator capacities, replaces the sweep
  std::vector<double> uncertainty_sweep{10.0};

  CoordinatorOptions coordinator;
};

struct ConfigIssue {
  std::string path;  // section.key, or the line for syntax errors
  std::string message;
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigIssue> issues;

  bool ok() const { return config.has_value(); }
  std::string describe() const;  // one issue per line
};

// Parses key = value text with sections. Every field has a default; unknown
// sections and keys are rejected. `base_dir` resolves a relative case path.
ConfigResult validate_config(std::string_view text, const std::string& base_dir = ".");
ConfigResult load_config_file(const std::string& path);

// Sets one field by its "section.key" path with the same checks as the parser.
// Returns an error message, empty on success.
std::string set_config_value(ExperimentConfig& config, const std::string& path, const std::string& value);

// Resolved configuration in the same format; parsing it reproduces the config.
std::string format_config(const ExperimentConfig& config);

// Built-in presets, loadable by name.
const std::vector<std::string>& preset_names();
std::optional<std::string> preset_text(std::string_view name);

// Case file lookup: as given, relative to `base_dir`, then in the bundled case directory.
std::string resolve_case_path(const std::string& path, const std::string& base_dir);

}  // namespace fdsm
