#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fdsm {

enum class BusKind { generator, aggregator, transit };

const char* to_string(BusKind kind);

struct Bus {
  int id = 0;
  std::string name;
  int cdf_type = 0;  // 0 load, 1 PQ-with-limits, 2 PV, 3 swing
  double load_mw = 0.0;
  double generation_mw = 0.0;
  BusKind kind = BusKind::transit;
  // Generator index when kind == generator, aggregator index when kind == aggregator.
  std::optional<std::size_t> attached_entity;
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double resistance = 0.0;
  double reactance = 0.0;  // per unit
  double charging = 0.0;
  double nominal_capacity = 0.0;  // MW
  double current_capacity = 0.0;  // MW
};

struct CdfOptions {
  double default_line_capacity_mw = 100.0;
};

class GridModel {
 public:
  std::string title;
  std::vector<Bus> buses;
  std::vector<Line> lines;

  std::size_t bus_count() const { return buses.size(); }
  std::size_t line_count() const { return lines.size(); }
  std::size_t generator_count() const { return generator_buses_.size(); }
  std::size_t aggregator_count() const { return aggregator_buses_.size(); }

  // Position of a bus id in `buses`; throws ValidationError for unknown ids.
  std::size_t bus_index(int id) const;
  bool has_bus(int id) const;

  const std::vector<int>& generator_buses() const { return generator_buses_; }
  const std::vector<int>& aggregator_buses() const { return aggregator_buses_; }

  // Places generators and aggregators on explicit buses (entity order = vector order).
  void assign_entities(const std::vector<int>& generator_bus_ids,
                       const std::vector<int>& aggregator_bus_ids);

  // Default placement: generators on PV/swing buses, aggregators on the
  // remaining buses with positive load, all in ascending bus order.
  void assign_default_entities();

  std::vector<double> current_capacities() const;
  std::vector<double> nominal_capacities() const;

 private:
  std::vector<int> generator_buses_;
  std::vector<int> aggregator_buses_;
};

GridModel parse_cdf(std::istream& in, const CdfOptions& options = {});
GridModel parse_cdf_text(const std::string& text, const CdfOptions& options = {});
GridModel parse_cdf_file(const std::string& path, const CdfOptions& options = {});

// Writes a minimal CDF text (title, bus and branch sections) that parse_cdf reads back.
std::string serialize_cdf(const GridModel& model);

// Structural equality used by round-trip tests: ids, kinds, entity placement,
// reactances and capacities.
bool structurally_equal(const GridModel& a, const GridModel& b, double tol = 1e-9);

// Lowest-numbered generator bus, or the lowest bus id when there are no generators.
int default_slack_bus(const GridModel& model);

// Returns a copy with all lines at nominal rating and line `index` derated by `factor`.
GridModel with_degraded_line(const GridModel& model, std::size_t index, double factor = 0.9);

// Memoryless degradation: restores nominal ratings, then derates one uniformly drawn line.
GridModel degrade_line(const GridModel& model, std::mt19937_64& rng, double factor = 0.9);

// Index drawn by degrade_line for the same rng state.
std::size_t draw_degraded_line(std::size_t line_count, std::mt19937_64& rng);

}  // namespace fdsm
