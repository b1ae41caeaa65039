#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fdsm/baselines/baselines.hpp"
#include "fdsm/coord/coordinator.hpp"
#include "fdsm/coord/system.hpp"

namespace fdsm {

struct PeriodRecord {
  std::size_t period = 0;
  std::size_t hour = 0;
  std::size_t key = 0;  // ISO state
  std::vector<std::size_t> aggregator_states;
  std::vector<double> demand;
  std::vector<double> storage;
  std::vector<double> prices;  // announced to each aggregator
  std::vector<double> purchases;
  std::vector<double> delivered;
  std::vector<std::size_t> generator_states;
  std::vector<double> previous_output;
  std::vector<double> max_output;
  std::vector<double> generation;
  std::vector<double> aggregator_costs;
  std::vector<double> generator_costs;
  std::vector<double> constraint_values;  // f at delivered purchases and generation
  bool safeguard = false;                 // dispatch deviated from the plan or shed load

  double total_cost() const;
};

struct EpisodeTrace {
  StrategyKind strategy = StrategyKind::proposed;
  std::uint64_t seed = 0;
  std::vector<PeriodRecord> periods;

  std::size_t flagged_periods() const;
};

// Solved decision makers an episode may draw on. Myopic and Lyapunov
// aggregators see the prices of `proposed`; without it they see zero prices.
struct StrategySet {
  const Coordinator* proposed = nullptr;
  const Coordinator* mumdp = nullptr;
  const CentralizedPlanner* centralized = nullptr;
  DriftForm drift = DriftForm::with_demand;
};

struct EpisodeOptions {
  StrategyKind strategy = StrategyKind::proposed;
  std::size_t horizon = 24 * 60;
  std::uint64_t seed = 1;
  double shed_cost = 1.0e5;  // dispatch device for unservable withdrawal, not a reported cost
};

// Executes one episode: exogenous draws, announced prices, aggregator actions,
// ISO dispatch with the feasibility safeguard and cost accounting.
EpisodeTrace run_episode(const DsmSystem& system, const StrategySet& strategies, const EpisodeOptions& options);

// Largest absolute difference between recorded stage costs and their recomputation.
double audit_trace(const DsmSystem& system, const EpisodeTrace& trace);

// (1 - delta) sum_t delta^t c_t over all entities.
double discounted_total(const EpisodeTrace& trace, double discount);
double discounted_total(const std::vector<double>& period_costs, double discount);

struct CostReport {
  double total = 0.0;                  // undiscounted sum over periods and entities
  double normalized = 0.0;             // total / buses / hours
  double discounted = 0.0;             // discounted_total
  double normalized_discounted = 0.0;  // discounted / buses
  std::vector<double> aggregator_average;  // mean stage cost per period
  double mean_price = 0.0;                 // announced, over aggregators and periods
  std::size_t flagged = 0;
};

CostReport cost_report(const DsmSystem& system, const EpisodeTrace& trace, double discount);

struct LmpEstimate {
  std::vector<double> expected_lmp;  // per aggregator, over the periods used
  std::vector<double> conjectured;   // mean announced price over the same periods
  std::size_t used = 0;
  std::size_t skipped = 0;  // periods whose dispatch had to shed
};

// Finite-difference LMPs of the trace's purchases, averaged over visited periods.
LmpEstimate estimate_lmp(const DsmSystem& system, const EpisodeTrace& trace, double step, double shed_cost = 1.0e5);

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace);

// Online coordination: the proposed policies act in the simulated environment and
// every period feeds one coordination round; entities re-solve every
// `resolve_every` periods. Returns the round diagnostics.
std::vector<RoundDiagnostics> train_online(Coordinator& coordinator, std::size_t periods, std::uint64_t seed,
                                           std::size_t resolve_every = 24);

}  // namespace fdsm
