#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fdsm/cli/config.hpp"
#include "fdsm/sim/episode.hpp"

namespace fdsm {

struct CostRow {
  StrategyKind scheme = StrategyKind::proposed;
  std::string storage;  // capacity in MW, or the ';'-joined per-aggregator assignment
  double uncertainty = 0.0;
  std::uint64_t seed = 0;
  bool intractable = false;
  CostReport report;
};

struct PriceRow {
  std::string storage;
  double uncertainty = 0.0;
  std::uint64_t seed = 0;
  std::size_t aggregator = 0;
  int bus = 0;
  double conjectured = 0.0;
  double expected_lmp = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

struct PolicyRow {
  StrategyKind scheme = StrategyKind::proposed;
  std::string storage;
  double uncertainty = 0.0;
  std::size_t aggregator = 0;
  std::size_t state = 0;
  std::size_t hour = 0;
  double demand = 0.0;
  double storage_level = 0.0;
  std::size_t iso_state = 0;
  std::vector<double> renewable;  // capacity of each renewable unit in this ISO state
  std::size_t derated_line = 0;   // 1-based, 0 when lines are not derated
  double purchase = 0.0;
};

struct ConvergenceRow {
  StrategyKind scheme = StrategyKind::proposed;
  std::string storage;
  double uncertainty = 0.0;
  IterationSummary summary;
};

struct TraceFile {
  std::string name;
  std::string text;
};

struct ExperimentResult {
  std::vector<CostRow> costs;
  std::vector<PriceRow> prices;
  std::vector<PolicyRow> policies;
  std::vector<ConvergenceRow> convergence;
  std::vector<TraceFile> traces;
};

// Runs every sweep point. Throws IntractableError when the centralized scheme
// exceeds the state bound and skip_intractable is off, ValidationError when the
// scenario cannot be built. Progress lines go to `log` when given.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

void write_costs_csv(std::ostream& out, const std::vector<CostRow>& rows);
void write_prices_csv(std::ostream& out, const std::vector<PriceRow>& rows);
void write_policy_csv(std::ostream& out, const std::vector<PolicyRow>& rows);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

// Writes the four CSV files, the traces and the resolved config into `dir`.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result, const std::string& dir);

// Mean normalized cost per scheme and sweep point.
std::string summary_table(const ExperimentResult& result);

}  // namespace fdsm
