#include "fdsm/mdp/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {

constexpr double kGridEps = 1e-9;

std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void check_ascending(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw ModelError(std::string(what) + " grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ModelError(std::string(what) + " grid must be strictly ascending");
  }
}

}  // namespace

std::size_t snap_to_grid(const std::vector<double>& grid, double value) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), value);
  if (it == grid.begin()) return 0;
  if (it == grid.end()) return grid.size() - 1;
  const std::size_t upper = static_cast<std::size_t>(it - grid.begin());
  const double below = value - grid[upper - 1];
  const double above = grid[upper] - value;
  return below < above - kGridEps ? upper - 1 : upper;
}

std::vector<double> uniform_grid(double upper, double step) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (upper < 0.0) throw DomainError("grid upper bound must be non-negative");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor(upper / step + kGridEps));
  for (std::size_t k = 0; k <= count; ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

std::vector<double> DemandProfile::next_distribution(std::size_t hour, std::size_t level) const {
  const std::size_t next = (hour + 1) % clock_count();
  if (!transition.empty()) return transition[hour][level];
  return probabilities[next];
}

void uniform_demand_levels(double mean, double range, std::size_t count, double quantum,
                           std::vector<double>& levels, std::vector<double>& probabilities) {
  if (count == 0) throw DomainError("demand grid needs at least one level");
  if (range < 0.0) throw DomainError("demand range must be non-negative");
  std::map<long long, std::pair<double, double>> merged;  // key -> (level, probability)
  auto add = [&](double level, double p) {
    if (quantum > 0.0) level = std::floor(level / quantum + 0.5) * quantum;
    level = std::max(level, 0.0);
    const long long key = std::llround(level * 1e6);
    auto& slot = merged[key];
    slot.first = level;
    slot.second += p;
  };
  if (count == 1 || range == 0.0) {
    add(mean, 1.0);
  } else {
    const double step = 2.0 * range / static_cast<double>(count - 1);
    const double edge = 1.0 / (2.0 * static_cast<double>(count - 1));
    for (std::size_t k = 0; k < count; ++k) {
      const bool end = k == 0 || k + 1 == count;
      add(mean - range + step * static_cast<double>(k), end ? edge : 2.0 * edge);
    }
  }
  levels.clear();
  probabilities.clear();
  for (const auto& [key, slot] : merged) {
    levels.push_back(slot.first);
    probabilities.push_back(slot.second);
  }
}

double aggregator_stage_cost(const AggregatorSpec& spec, double demand, double storage, double action) {
  const double excess = std::max(action - demand, 0.0);
  const bool unmet = storage + action < demand - kGridEps;
  return spec.storage_cost * excess + (unmet ? spec.penalty : 0.0);
}

AggregatorModel::AggregatorModel(AggregatorSpec spec) : spec_(std::move(spec)) {
  const auto& demand = spec_.demand;
  const std::size_t hours = demand.clock_count();
  if (hours == 0) throw ModelError("demand profile has no clocks");
  if (demand.probabilities.size() != hours) throw ModelError("demand probabilities do not match levels");
  for (std::size_t h = 0; h < hours; ++h) {
    check_ascending(demand.levels[h], "demand");
    if (demand.probabilities[h].size() != demand.levels[h].size()) {
      throw ModelError("demand probabilities do not match levels");
    }
  }
  check_ascending(spec_.storage_levels, "storage");
  check_ascending(spec_.action_levels, "action");
  if (spec_.storage_levels.front() != 0.0) throw ModelError("storage grid must start at 0");
  if (spec_.action_levels.front() < 0.0) throw ModelError("purchase grid must be non-negative");

  hour_offset_.assign(hours + 1, 0);
  for (std::size_t h = 0; h < hours; ++h) {
    hour_offset_[h + 1] = hour_offset_[h] + demand.levels[h].size() * spec_.storage_levels.size();
  }

  MdpBuilder builder(hours, hours, spec_.action_levels, "hour,demand_mw,storage_mw");
  for (std::size_t h = 0; h < hours; ++h) {
    const std::size_t next_hour = (h + 1) % hours;
    for (std::size_t k = 0; k < demand.levels[h].size(); ++k) {
      const auto next_demand = demand.next_distribution(h, k);
      if (next_demand.size() != demand.levels[next_hour].size()) {
        throw ModelError("demand transition row has the wrong size");
      }
      for (std::size_t e = 0; e < spec_.storage_levels.size(); ++e) {
        const AggregatorState s{h, k, e};
        builder.add_state(h, h, std::to_string(h) + "," + fmt(demand_mw(s)) + "," + fmt(storage_mw(s)));
        for (std::size_t a = 0; a < spec_.action_levels.size(); ++a) {
          const double amount = spec_.action_levels[a];
          std::vector<Transition> successors;
          successors.reserve(next_demand.size());
          for (std::size_t k2 = 0; k2 < next_demand.size(); ++k2) {
            if (next_demand[k2] == 0.0) continue;
            const AggregatorState n = storage_transition(s, amount, k2);
            successors.push_back({static_cast<std::uint32_t>(index(n)), next_demand[k2]});
          }
          builder.add_choice(a, stage_cost(s, amount), std::move(successors));
        }
      }
    }
  }
  mdp_ = std::move(builder).build();
}

std::size_t AggregatorModel::index(const AggregatorState& s) const {
  return hour_offset_[s.hour] + s.demand_level * spec_.storage_levels.size() + s.storage_level;
}

AggregatorState AggregatorModel::state(std::size_t idx) const {
  const auto it = std::upper_bound(hour_offset_.begin(), hour_offset_.end(), idx);
  const std::size_t h = static_cast<std::size_t>(it - hour_offset_.begin()) - 1;
  const std::size_t rest = idx - hour_offset_[h];
  return {h, rest / spec_.storage_levels.size(), rest % spec_.storage_levels.size()};
}

double AggregatorModel::stage_cost(const AggregatorState& s, double action) const {
  return aggregator_stage_cost(spec_, demand_mw(s), storage_mw(s), action);
}

std::size_t AggregatorModel::snap_storage(double mw) const {
  return snap_to_grid(spec_.storage_levels, std::clamp(mw, 0.0, spec_.capacity()));
}

AggregatorState AggregatorModel::storage_transition(const AggregatorState& s, double action,
                                                    std::size_t next_demand_level) const {
  const double left = storage_mw(s) + action - demand_mw(s);
  return {(s.hour + 1) % clock_count(), next_demand_level, snap_storage(left)};
}

std::size_t AggregatorModel::action_index(double amount) const {
  const std::size_t k = snap_to_grid(spec_.action_levels, amount);
  if (std::abs(spec_.action_levels[k] - amount) > 1e-9) {
    throw ProtocolError("purchase " + fmt(amount) + " MW is not on the action grid");
  }
  return k;
}

double conventional_cost(const ConventionalSpec& spec, double previous, double output) {
  const double ramp = output - previous;
  return spec.quadratic * output * output + spec.linear * output + spec.ramp * ramp * ramp;
}

double renewable_cost(const RenewableSpec& spec, double output) { return spec.unit_cost * output; }

GeneratorModel GeneratorModel::conventional(ConventionalSpec spec) {
  check_ascending(spec.output_levels, "generator output");
  GeneratorModel g;
  g.kind_ = GeneratorKind::conventional;
  g.conventional_ = spec;
  g.levels_ = spec.output_levels;
  g.clock_count_ = spec.clock_count;
  g.inner_count_ = spec.output_levels.size();
  MdpBuilder builder(spec.clock_count, spec.clock_count, spec.output_levels, "hour,previous_mw");
  for (std::size_t h = 0; h < spec.clock_count; ++h) {
    const std::size_t next = (h + 1) % spec.clock_count;
    for (std::size_t p = 0; p < g.inner_count_; ++p) {
      builder.add_state(h, h, std::to_string(h) + "," + fmt(spec.output_levels[p]));
      for (std::size_t a = 0; a < g.inner_count_; ++a) {
        builder.add_choice(a, conventional_cost(spec, spec.output_levels[p], spec.output_levels[a]),
                           {{static_cast<std::uint32_t>(g.index(next, a)), 1.0}});
      }
    }
  }
  g.mdp_ = std::move(builder).build();
  return g;
}

GeneratorModel GeneratorModel::renewable(RenewableSpec spec) {
  check_ascending(spec.output_levels, "generator output");
  check_ascending(spec.capacity_levels, "renewable capacity");
  if (spec.capacity_probabilities.size() != spec.capacity_levels.size()) {
    throw ModelError("renewable capacity probabilities do not match levels");
  }
  GeneratorModel g;
  g.kind_ = GeneratorKind::renewable;
  g.renewable_ = spec;
  g.levels_ = spec.output_levels;
  g.clock_count_ = spec.clock_count;
  g.inner_count_ = spec.capacity_levels.size();
  const std::size_t classes = spec.clock_count * g.inner_count_;
  MdpBuilder builder(spec.clock_count, classes, spec.output_levels, "hour,capacity_mw");
  for (std::size_t h = 0; h < spec.clock_count; ++h) {
    const std::size_t next = (h + 1) % spec.clock_count;
    for (std::size_t r = 0; r < g.inner_count_; ++r) {
      builder.add_state(h, g.index(h, r), std::to_string(h) + "," + fmt(spec.capacity_levels[r]));
      for (std::size_t a = 0; a < spec.output_levels.size(); ++a) {
        if (spec.output_levels[a] > spec.capacity_levels[r] + kGridEps) break;
        std::vector<Transition> successors;
        for (std::size_t r2 = 0; r2 < g.inner_count_; ++r2) {
          successors.push_back({static_cast<std::uint32_t>(g.index(next, r2)), spec.capacity_probabilities[r2]});
        }
        builder.add_choice(a, renewable_cost(spec, spec.output_levels[a]), std::move(successors));
      }
    }
  }
  g.mdp_ = std::move(builder).build();
  return g;
}

double GeneratorModel::max_output(std::size_t state) const {
  if (kind_ == GeneratorKind::conventional) return levels_.back();
  return std::min(levels_.back(), renewable_.capacity_levels[level_of(state)]);
}

double GeneratorModel::stage_cost(std::size_t state, double output) const {
  if (kind_ == GeneratorKind::conventional) {
    return conventional_cost(conventional_, levels_[level_of(state)], output);
  }
  return renewable_cost(renewable_, output);
}

}  // namespace fdsm
