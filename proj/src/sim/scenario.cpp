#include "fdsm/sim/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "fdsm/errors.hpp"
#include "fdsm/grid/ptdf.hpp"

namespace fdsm {

namespace {

std::vector<double> grid_to(double upper, double step, const char* what) {
  if (!(step > 0.0)) throw ValidationError(std::string(what) + " step must be positive");
  const double ratio = upper / step;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ValidationError(std::string(what) + " upper bound " + std::to_string(upper) +
                          " is not a multiple of the step " + std::to_string(step));
  }
  return uniform_grid(upper, step);
}

double round_up(double value, double step) { return std::ceil(value / step - 1e-9) * step; }

}  // namespace

double DemandSpec::mean(std::size_t aggregator, std::size_t hour) const {
  return (is_peak(hour) ? peak_mean : offpeak_mean) + static_cast<double>(aggregator) * mean_step;
}

DemandProcess::DemandProcess(DemandSpec spec, std::size_t clock_count, std::size_t aggregators)
    : spec_(spec), clock_count_(clock_count) {
  if (clock_count == 0) throw ValidationError("clock count must be positive");
  if (spec_.levels == 0) throw ValidationError("demand needs at least one level");
  grids_.resize(aggregators);
  for (std::size_t i = 0; i < aggregators; ++i) {
    for (std::size_t h = 0; h < clock_count; ++h) grids_[i].push_back(make(i, h));
  }
}

DemandProcess::HourGrid DemandProcess::make(std::size_t aggregator, std::size_t hour) const {
  HourGrid g;
  const double mean = spec_.mean(aggregator, hour);
  const double range = spec_.range(hour);
  const std::size_t n = range > 0.0 ? spec_.levels : 1;
  std::vector<double> weights;
  for (std::size_t k = 0; k < n; ++k) {
    g.raw.push_back(n == 1 ? mean : mean - range + 2.0 * range * static_cast<double>(k) / static_cast<double>(n - 1));
    const bool edge = k == 0 || k + 1 == n;
    weights.push_back(n == 1 ? 1.0 : (edge ? 0.5 : 1.0) / static_cast<double>(n - 1));
  }
  for (std::size_t k = 0; k < n; ++k) {
    double level = g.raw[k];
    if (spec_.quantum > 0.0) level = std::floor(level / spec_.quantum + 0.5) * spec_.quantum;
    level = std::max(level, 0.0);
    auto it = std::find_if(g.levels.begin(), g.levels.end(), [&](double l) { return std::abs(l - level) < 1e-9; });
    if (it == g.levels.end()) {
      g.levels.push_back(level);
      g.probabilities.push_back(0.0);
      it = g.levels.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - g.levels.begin());
    g.raw_to_level.push_back(idx);
    g.probabilities[idx] += weights[k];
  }
  return g;
}

const std::vector<double>& DemandProcess::levels(std::size_t aggregator, std::size_t hour) const {
  return grids_.at(aggregator).at(hour).levels;
}

DemandProfile DemandProcess::profile(std::size_t aggregator) const {
  DemandProfile p;
  for (const auto& g : grids_.at(aggregator)) {
    p.levels.push_back(g.levels);
    p.probabilities.push_back(g.probabilities);
  }
  return p;
}

std::size_t DemandProcess::sample_level(std::size_t aggregator, std::size_t hour, std::mt19937_64& rng) const {
  const HourGrid& g = grids_.at(aggregator).at(hour);
  const double mean = spec_.mean(aggregator, hour);
  const double range = spec_.range(hour);
  if (g.raw.size() == 1) return g.raw_to_level[0];
  std::uniform_real_distribution<double> draw(mean - range, mean + range);
  return g.raw_to_level[snap_to_grid(g.raw, draw(rng))];
}

double DemandProcess::sample_mw(std::size_t aggregator, std::size_t hour, std::mt19937_64& rng) const {
  return levels(aggregator, hour)[sample_level(aggregator, hour, rng)];
}

double storage_capacity_of(const ScenarioSpec& spec, std::size_t aggregator) {
  if (spec.storage_capacity.empty()) throw ValidationError("storage capacity list is empty");
  return spec.storage_capacity[aggregator % spec.storage_capacity.size()];
}

GridModel load_grid(const ScenarioSpec& spec) {
  GridModel grid = parse_cdf_file(spec.case_path, CdfOptions{spec.default_line_capacity});
  if (spec.generator_buses.empty() && spec.aggregator_buses.empty()) {
    grid.assign_default_entities();
  } else {
    grid.assign_entities(spec.generator_buses, spec.aggregator_buses);
  }
  return grid;
}

DsmSystem build_system(const ScenarioSpec& spec, const GridModel& grid) {
  DsmSystem sys;
  sys.grid = grid;
  const int slack = spec.slack_bus.value_or(default_slack_bus(grid));
  sys.constraints = assemble_constraints(grid, build_ptdf(grid, slack));
  sys.degrade_lines = spec.degrade_lines && grid.line_count() > 0;
  sys.degrade_factor = spec.degrade_factor;

  const std::size_t gens = grid.generator_count();
  if (spec.renewable_count > gens) {
    throw ValidationError("renewable count " + std::to_string(spec.renewable_count) + " exceeds the " +
                          std::to_string(gens) + " generators of the case");
  }
  for (std::size_t g = 0; g < gens; ++g) {
    if (g < spec.renewable_count) {
      RenewableSpec r;
      uniform_demand_levels(spec.renewable_mean, spec.renewable_deviation, spec.renewable_levels,
                            spec.renewable_step, r.capacity_levels, r.capacity_probabilities);
      r.output_levels = grid_to(round_up(r.capacity_levels.back(), spec.renewable_step), spec.renewable_step,
                                "renewable output");
      r.unit_cost = static_cast<double>(g + 1);
      r.clock_count = spec.clock_count;
      sys.generators.push_back(GeneratorModel::renewable(std::move(r)));
    } else {
      ConventionalSpec c;
      c.output_levels = grid_to(spec.conventional_max, spec.conventional_step, "conventional output");
      c.quadratic = spec.quadratic;
      c.linear = spec.linear;
      c.ramp = spec.ramp;
      c.clock_count = spec.clock_count;
      sys.generators.push_back(GeneratorModel::conventional(std::move(c)));
    }
  }

  const DemandProcess demand(spec.demand, spec.clock_count, grid.aggregator_count());
  for (std::size_t i = 0; i < grid.aggregator_count(); ++i) {
    AggregatorSpec a;
    a.demand = demand.profile(i);
    const double cap = storage_capacity_of(spec, i);
    if (cap < 0.0) throw ValidationError("storage capacity must be non-negative");
    a.storage_levels = cap > 0.0 ? grid_to(cap, spec.storage_step, "storage") : std::vector<double>{0.0};
    double top = 0.0;
    for (const auto& levels : a.demand.levels) top = std::max(top, levels.back());
    const double action_max = spec.action_max.value_or(round_up(top + cap, spec.action_step));
    a.action_levels = grid_to(action_max, spec.action_step, "purchase");
    a.storage_cost = spec.storage_cost;
    a.penalty = spec.penalty;
    sys.aggregators.emplace_back(std::move(a));
  }
  sys.validate();
  return sys;
}

DsmSystem build_system(const ScenarioSpec& spec) { return build_system(spec, load_grid(spec)); }

}  // namespace fdsm
