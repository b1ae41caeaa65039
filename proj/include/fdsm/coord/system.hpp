#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fdsm/grid/constraints.hpp"
#include "fdsm/grid/grid_model.hpp"
#include "fdsm/mdp/models.hpp"
#include "fdsm/sim/dispatch.hpp"

namespace fdsm {

// Everything the ISO and the entities share: network, constraint coefficients
// and one finite MDP per generator and per aggregator (entity order of the grid).
struct DsmSystem {
  GridModel grid;
  ConstraintSet constraints;
  std::vector<GeneratorModel> generators;
  std::vector<AggregatorModel> aggregators;
  bool degrade_lines = false;
  double degrade_factor = 0.9;

  std::size_t clock_count() const;
  // Throws ModelError when entity counts or clocks disagree.
  void validate() const;
  DispatchNetwork dispatch_network(double shed_cost) const;
};

GeneratorCost dispatch_cost(const GeneratorModel& generator);

// ISO state used to index multipliers: hour, renewable capacity level of every
// renewable generator and the derated line (when degradation is on). Previous
// conventional outputs are not part of the key.
class IsoKeySpace {
 public:
  explicit IsoKeySpace(const DsmSystem& system);

  std::size_t size() const { return clock_count_ * per_hour_; }
  std::size_t clock_count() const { return clock_count_; }
  std::size_t keys_per_hour() const { return per_hour_; }
  std::size_t line_outcomes() const { return line_outcomes_; }

  std::size_t key(std::size_t hour, const std::vector<std::size_t>& renewable_levels, std::size_t line) const;
  std::size_t hour_of(std::size_t key) const { return key / per_hour_; }
  // Derated line index; meaningless when degradation is off.
  std::size_t line_of(std::size_t key) const { return key % line_outcomes_; }
  std::vector<std::size_t> renewable_levels(std::size_t key) const;
  // Capacity level of generator g in this key (0 for conventional units).
  std::size_t generator_level(std::size_t key, std::size_t generator) const;

  // P(key | hour): product of renewable level probabilities and the uniform line draw.
  double probability_given_hour(std::size_t key) const;
  std::vector<double> capacities(std::size_t key) const;

  // Price class of an entity's states that see this key, and P(key | that class).
  std::size_t generator_class(std::size_t key, std::size_t generator) const;
  std::size_t aggregator_class(std::size_t key) const { return hour_of(key); }
  double probability_given_generator_class(std::size_t key, std::size_t generator) const;

  std::string describe(std::size_t key) const;

 private:
  const DsmSystem* system_;
  std::size_t clock_count_ = 1;
  std::size_t line_outcomes_ = 1;
  std::vector<std::size_t> renewables_;     // generator indices
  std::vector<std::size_t> renewable_pos_;  // generator -> position in renewables_, or npos
  std::vector<std::size_t> radix_;          // level counts of renewables
  std::size_t combos_ = 1;
  std::size_t per_hour_ = 1;
};

}  // namespace fdsm
