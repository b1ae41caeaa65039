#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fdsm/coord/system.hpp"

namespace fdsm {

// Hour-of-day demand: peak hours use the peak mean and range, other hours the
// off-peak ones; aggregator i (0-based) adds i * mean_step to the mean.
struct DemandSpec {
  double peak_mean = 50.0;
  double offpeak_mean = 25.0;
  double mean_step = 0.5;
  double peak_range = 5.0;
  double offpeak_range = 2.0;
  std::size_t peak_first = 17;
  std::size_t peak_last = 22;
  std::size_t levels = 3;
  double quantum = 1.0;  // demand levels are rounded to this many MW (0 keeps them exact)

  bool is_peak(std::size_t hour) const { return hour >= peak_first && hour <= peak_last; }
  double mean(std::size_t aggregator, std::size_t hour) const;
  double range(std::size_t hour) const { return is_peak(hour) ? peak_range : offpeak_range; }
};

class DemandProcess {
 public:
  DemandProcess(DemandSpec spec, std::size_t clock_count, std::size_t aggregators);

  const DemandSpec& spec() const { return spec_; }
  std::size_t clock_count() const { return clock_count_; }
  // Rounded level grid of one aggregator at one hour.
  const std::vector<double>& levels(std::size_t aggregator, std::size_t hour) const;
  DemandProfile profile(std::size_t aggregator) const;

  // Uniform draw on [mean - range, mean + range] mapped to the nearest grid point;
  // returns the level index.
  std::size_t sample_level(std::size_t aggregator, std::size_t hour, std::mt19937_64& rng) const;
  double sample_mw(std::size_t aggregator, std::size_t hour, std::mt19937_64& rng) const;

 private:
  DemandSpec spec_;
  std::size_t clock_count_;
  // Unrounded draw points, their rounded level and the merged level distribution.
  struct HourGrid {
    std::vector<double> raw;
    std::vector<std::size_t> raw_to_level;
    std::vector<double> levels;
    std::vector<double> probabilities;
  };
  HourGrid make(std::size_t aggregator, std::size_t hour) const;
  std::vector<std::vector<HourGrid>> grids_;
};

struct ScenarioSpec {
  std::string case_path;
  double default_line_capacity = 100.0;
  std::optional<int> slack_bus;
  std::vector<int> generator_buses;   // empty: default placement
  std::vector<int> aggregator_buses;  // empty: default placement
  std::size_t clock_count = 24;

  DemandSpec demand;
  // Storage capacity per aggregator; one entry applies to all, several repeat cyclically.
  std::vector<double> storage_capacity{25.0};
  double storage_step = 1.0;
  double action_step = 1.0;
  std::optional<double> action_max;  // default: highest demand level + storage capacity
  double storage_cost = 2.0;
  double penalty = 1.0e4;

  std::size_t renewable_count = 0;  // the first generators are renewable
  double conventional_max = 150.0;
  double conventional_step = 5.0;
  double quadratic = 0.5;
  double linear = 0.0;
  double ramp = 0.1;
  double renewable_mean = 50.0;
  double renewable_deviation = 0.0;
  std::size_t renewable_levels = 3;
  double renewable_step = 5.0;

  bool degrade_lines = true;
  double degrade_factor = 0.9;
};

// Aggregator storage capacity assigned by the cyclic rule.
double storage_capacity_of(const ScenarioSpec& spec, std::size_t aggregator);

GridModel load_grid(const ScenarioSpec& spec);
DsmSystem build_system(const ScenarioSpec& spec, const GridModel& grid);
DsmSystem build_system(const ScenarioSpec& spec);

}  // namespace fdsm
