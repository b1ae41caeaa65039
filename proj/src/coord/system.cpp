#include "fdsm/coord/system.hpp"

#include <limits>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
}

std::size_t DsmSystem::clock_count() const {
  if (!aggregators.empty()) return aggregators.front().clock_count();
  if (!generators.empty()) return generators.front().clock_count();
  return 1;
}

void DsmSystem::validate() const {
  if (generators.size() != constraints.generator_count()) {
    throw ModelError("system has " + std::to_string(generators.size()) + " generator models for " +
                     std::to_string(constraints.generator_count()) + " generator buses");
  }
  if (aggregators.size() != constraints.aggregator_count()) {
    throw ModelError("system has " + std::to_string(aggregators.size()) + " aggregator models for " +
                     std::to_string(constraints.aggregator_count()) + " aggregator buses");
  }
  const std::size_t h = clock_count();
  for (const auto& g : generators) {
    if (g.clock_count() != h) throw ModelError("generator clock differs from the system clock");
  }
  for (const auto& a : aggregators) {
    if (a.clock_count() != h) throw ModelError("aggregator clock differs from the system clock");
  }
  if (degrade_lines && constraints.line_count == 0) throw ModelError("line degradation needs at least one line");
}

GeneratorCost dispatch_cost(const GeneratorModel& generator) {
  if (generator.kind() == GeneratorKind::conventional) {
    const auto& s = generator.conventional_spec();
    return {s.quadratic, s.linear, s.ramp};
  }
  return {0.0, generator.renewable_spec().unit_cost, 0.0};
}

DispatchNetwork DsmSystem::dispatch_network(double shed_cost) const {
  DispatchNetwork net;
  net.constraints = constraints;
  for (const auto& g : generators) net.costs.push_back(dispatch_cost(g));
  net.shed_cost = shed_cost;
  return net;
}

IsoKeySpace::IsoKeySpace(const DsmSystem& system) : system_(&system) {
  clock_count_ = system.clock_count();
  line_outcomes_ = system.degrade_lines ? system.constraints.line_count : 1;
  renewable_pos_.assign(system.generators.size(), kNone);
  for (std::size_t g = 0; g < system.generators.size(); ++g) {
    if (system.generators[g].kind() == GeneratorKind::renewable) {
      renewable_pos_[g] = renewables_.size();
      renewables_.push_back(g);
      radix_.push_back(system.generators[g].level_count());
      combos_ *= radix_.back();
    }
  }
  per_hour_ = combos_ * line_outcomes_;
}

std::size_t IsoKeySpace::key(std::size_t hour, const std::vector<std::size_t>& levels, std::size_t line) const {
  if (levels.size() != renewables_.size()) throw ModelError("renewable level vector has the wrong size");
  std::size_t combo = 0;
  for (std::size_t r = 0; r < levels.size(); ++r) combo = combo * radix_[r] + levels[r];
  return hour * per_hour_ + combo * line_outcomes_ + (line_outcomes_ > 1 ? line : 0);
}

std::vector<std::size_t> IsoKeySpace::renewable_levels(std::size_t key) const {
  std::size_t combo = (key % per_hour_) / line_outcomes_;
  std::vector<std::size_t> out(renewables_.size());
  for (std::size_t r = renewables_.size(); r-- > 0;) {
    out[r] = combo % radix_[r];
    combo /= radix_[r];
  }
  return out;
}

std::size_t IsoKeySpace::generator_level(std::size_t key, std::size_t generator) const {
  const std::size_t pos = renewable_pos_.at(generator);
  if (pos == kNone) return 0;
  return renewable_levels(key)[pos];
}

double IsoKeySpace::probability_given_hour(std::size_t key) const {
  double p = 1.0 / static_cast<double>(line_outcomes_);
  const auto levels = renewable_levels(key);
  for (std::size_t r = 0; r < renewables_.size(); ++r) {
    p *= system_->generators[renewables_[r]].renewable_spec().capacity_probabilities[levels[r]];
  }
  return p;
}

std::vector<double> IsoKeySpace::capacities(std::size_t key) const {
  if (!system_->degrade_lines) return system_->grid.nominal_capacities();
  return with_degraded_line(system_->grid, line_of(key), system_->degrade_factor).current_capacities();
}

std::size_t IsoKeySpace::generator_class(std::size_t key, std::size_t generator) const {
  const GeneratorModel& g = system_->generators[generator];
  const std::size_t h = hour_of(key);
  if (g.kind() == GeneratorKind::conventional) return h;
  return g.index(h, generator_level(key, generator));
}

double IsoKeySpace::probability_given_generator_class(std::size_t key, std::size_t generator) const {
  const double p = probability_given_hour(key);
  const GeneratorModel& g = system_->generators[generator];
  if (g.kind() == GeneratorKind::conventional) return p;
  return p / g.renewable_spec().capacity_probabilities[generator_level(key, generator)];
}

std::string IsoKeySpace::describe(std::size_t key) const {
  std::string out = "h" + std::to_string(hour_of(key));
  for (std::size_t level : renewable_levels(key)) out += "/r" + std::to_string(level);
  if (line_outcomes_ > 1) out += "/l" + std::to_string(line_of(key) + 1);
  return out;
}

}  // namespace fdsm
