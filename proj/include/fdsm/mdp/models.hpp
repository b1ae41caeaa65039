#pragma once

#include <cstddef>
#include <vector>

#include "fdsm/mdp/entity_mdp.hpp"

namespace fdsm {

// Nearest grid point on an ascending grid; exact midpoints go to the upper point.
std::size_t snap_to_grid(const std::vector<double>& grid, double value);

// Uniform grid {0, step, ..., <= upper}; upper is included when it is a multiple of step.
std::vector<double> uniform_grid(double upper, double step);

struct DemandProfile {
  // levels[h][k] in MW and the probability of drawing level k at clock h.
  std::vector<std::vector<double>> levels;
  std::vector<std::vector<double>> probabilities;
  // Optional Markov structure: transition[h][k][k2] = P(level k2 at h+1 | level k at h).
  // Empty means independent draws from probabilities[h + 1].
  std::vector<std::vector<std::vector<double>>> transition;

  std::size_t clock_count() const { return levels.size(); }
  std::vector<double> next_distribution(std::size_t hour, std::size_t level) const;
};

// Levels mean + {-range, ..., +range} with the probabilities of a uniform draw
// snapped to the nearest level. Levels are rounded to `quantum` when it is positive.
void uniform_demand_levels(double mean, double range, std::size_t count, double quantum,
                           std::vector<double>& levels, std::vector<double>& probabilities);

struct AggregatorSpec {
  DemandProfile demand;
  std::vector<double> storage_levels;  // ascending, starts at 0
  std::vector<double> action_levels;   // ascending purchase grid
  double storage_cost = 2.0;           // $ per MW bought beyond current demand
  double penalty = 1.0e4;              // $ per period with unmet demand

  double capacity() const { return storage_levels.back(); }
};

struct AggregatorState {
  std::size_t hour = 0;
  std::size_t demand_level = 0;
  std::size_t storage_level = 0;
  bool operator==(const AggregatorState&) const = default;
};

// Stage cost 2 (a - d)^+ + p 1{e + a < d} with the spec's coefficients.
double aggregator_stage_cost(const AggregatorSpec& spec, double demand, double storage, double action);

class AggregatorModel {
 public:
  explicit AggregatorModel(AggregatorSpec spec);

  const AggregatorSpec& spec() const { return spec_; }
  const EntityMdp& mdp() const { return mdp_; }
  std::size_t clock_count() const { return spec_.demand.clock_count(); }

  std::size_t index(const AggregatorState& state) const;
  AggregatorState state(std::size_t index) const;
  double demand_mw(const AggregatorState& s) const { return spec_.demand.levels[s.hour][s.demand_level]; }
  double storage_mw(const AggregatorState& s) const { return spec_.storage_levels[s.storage_level]; }

  double stage_cost(const AggregatorState& s, double action) const;
  // e' = snap(clamp(e + a - d, 0, capacity)); hour advances; demand becomes next_demand_level.
  AggregatorState storage_transition(const AggregatorState& s, double action, std::size_t next_demand_level) const;
  std::size_t snap_storage(double mw) const;

  // Action index on the purchase grid for an amount; throws ProtocolError if off grid.
  std::size_t action_index(double amount) const;

 private:
  AggregatorSpec spec_;
  std::vector<std::size_t> hour_offset_;
  EntityMdp mdp_;
};

struct ConventionalSpec {
  std::vector<double> output_levels;  // ascending, MW
  double quadratic = 0.5;             // $ / MW^2
  double linear = 0.0;                // $ / MW
  double ramp = 0.1;                  // $ / MW^2 of output change
  std::size_t clock_count = 24;
};

struct RenewableSpec {
  std::vector<double> output_levels;     // ascending, MW
  std::vector<double> capacity_levels;   // possible maximum outputs
  std::vector<double> capacity_probabilities;
  double unit_cost = 1.0;                // $ / MW
  std::size_t clock_count = 24;
};

double conventional_cost(const ConventionalSpec& spec, double previous, double output);
double renewable_cost(const RenewableSpec& spec, double output);

enum class GeneratorKind { conventional, renewable };

// Conventional state (hour, previous output level); renewable state (hour, capacity level).
class GeneratorModel {
 public:
  static GeneratorModel conventional(ConventionalSpec spec);
  static GeneratorModel renewable(RenewableSpec spec);

  GeneratorKind kind() const { return kind_; }
  const EntityMdp& mdp() const { return mdp_; }
  const std::vector<double>& output_levels() const { return levels_; }
  std::size_t clock_count() const { return clock_count_; }
  std::size_t level_count() const { return inner_count_; }  // previous-output or capacity levels

  std::size_t index(std::size_t hour, std::size_t level) const { return hour * inner_count_ + level; }
  std::size_t hour_of(std::size_t state) const { return state / inner_count_; }
  std::size_t level_of(std::size_t state) const { return state % inner_count_; }

  const ConventionalSpec& conventional_spec() const { return conventional_; }
  const RenewableSpec& renewable_spec() const { return renewable_; }
  double max_output(std::size_t state) const;
  double stage_cost(std::size_t state, double output) const;

 private:
  GeneratorKind kind_ = GeneratorKind::conventional;
  ConventionalSpec conventional_;
  RenewableSpec renewable_;
  std::vector<double> levels_;
  std::size_t clock_count_ = 1;
  std::size_t inner_count_ = 1;
  EntityMdp mdp_;
};

}  // namespace fdsm
