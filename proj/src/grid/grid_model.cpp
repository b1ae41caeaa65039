#include "fdsm/grid/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "fdsm/errors.hpp"

namespace fdsm {

const char* to_string(BusKind kind) {
  switch (kind) {
    case BusKind::generator:
      return "generator";
    case BusKind::aggregator:
      return "aggregator";
    case BusKind::transit:
      return "transit";
  }
  return "transit";
}

std::size_t GridModel::bus_index(int id) const {
  for (std::size_t b = 0; b < buses.size(); ++b) {
    if (buses[b].id == id) return b;
  }
  throw ValidationError("unknown bus id " + std::to_string(id));
}

bool GridModel::has_bus(int id) const {
  return std::any_of(buses.begin(), buses.end(), [id](const Bus& b) { return b.id == id; });
}

void GridModel::assign_entities(const std::vector<int>& generator_bus_ids,
                                const std::vector<int>& aggregator_bus_ids) {
  std::vector<Bus> updated = buses;
  for (auto& bus : updated) {
    bus.kind = BusKind::transit;
    bus.attached_entity.reset();
  }
  auto attach = [&](int id, BusKind kind, std::size_t entity) {
    if (!has_bus(id)) {
      throw ValidationError(std::string(to_string(kind)) + " " + std::to_string(entity) +
                            " mapped to unknown bus " + std::to_string(id));
    }
    Bus& bus = updated[bus_index(id)];
    if (bus.attached_entity) {
      throw ValidationError("bus " + std::to_string(id) + " already hosts an entity");
    }
    bus.kind = kind;
    bus.attached_entity = entity;
  };
  for (std::size_t g = 0; g < generator_bus_ids.size(); ++g) {
    attach(generator_bus_ids[g], BusKind::generator, g);
  }
  for (std::size_t i = 0; i < aggregator_bus_ids.size(); ++i) {
    attach(aggregator_bus_ids[i], BusKind::aggregator, i);
  }
  buses = std::move(updated);
  generator_buses_ = generator_bus_ids;
  aggregator_buses_ = aggregator_bus_ids;
}

void GridModel::assign_default_entities() {
  std::vector<const Bus*> sorted;
  for (const auto& bus : buses) sorted.push_back(&bus);
  std::sort(sorted.begin(), sorted.end(), [](const Bus* a, const Bus* b) { return a->id < b->id; });
  std::vector<int> gens;
  std::vector<int> aggs;
  for (const Bus* bus : sorted) {
    if (bus->cdf_type == 2 || bus->cdf_type == 3) {
      gens.push_back(bus->id);
    } else if (bus->load_mw > 0.0) {
      aggs.push_back(bus->id);
    }
  }
  assign_entities(gens, aggs);
}

std::vector<double> GridModel::current_capacities() const {
  std::vector<double> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(line.current_capacity);
  return out;
}

std::vector<double> GridModel::nominal_capacities() const {
  std::vector<double> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(line.nominal_capacity);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool starts_with_ci(const std::string& line, const std::string& prefix) {
  const std::string t = trim(line);
  if (t.size() < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (std::toupper(static_cast<unsigned char>(t[k])) != prefix[k]) return false;
  }
  return true;
}

bool is_sentinel(const std::string& line) {
  const std::string t = trim(line);
  return t.rfind("-999", 0) == 0;
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line_no, const char* field) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot read " + field + " from '" +
                     tok + "'");
  }
  return v;
}

int to_int(const std::string& tok, std::size_t line_no, const char* field) {
  const double v = to_double(tok, line_no, field);
  if (v != std::floor(v)) {
    throw ParseError("line " + std::to_string(line_no) + ": " + field + " must be an integer");
  }
  return static_cast<int>(v);
}

struct Section {
  std::vector<std::pair<std::size_t, std::string>> records;
};

// Collects the records between a "<NAME> DATA FOLLOWS" header and its -999 sentinel.
Section read_section(const std::vector<std::string>& lines, std::size_t& cursor,
                     const std::string& header, const std::string& label) {
  while (cursor < lines.size() && !starts_with_ci(lines[cursor], header)) ++cursor;
  if (cursor == lines.size()) {
    throw ParseError(label + " section header '" + header + "' not found");
  }
  const std::size_t header_line = cursor + 1;
  ++cursor;
  Section section;
  while (cursor < lines.size()) {
    const std::string& line = lines[cursor];
    if (is_sentinel(line)) {
      ++cursor;
      return section;
    }
    if (starts_with_ci(line, "BRANCH DATA FOLLOWS") || starts_with_ci(line, "BUS DATA FOLLOWS") ||
        starts_with_ci(line, "LOSS ZONES FOLLOWS") || starts_with_ci(line, "END OF DATA")) {
      throw ParseError(label + " section starting at line " + std::to_string(header_line) +
                       " is missing its -999 sentinel before line " + std::to_string(cursor + 1));
    }
    if (!trim(line).empty()) section.records.emplace_back(cursor + 1, line);
    ++cursor;
  }
  throw ParseError(label + " section starting at line " + std::to_string(header_line) +
                   " is missing its -999 sentinel at line " + std::to_string(cursor + 1) +
                   " (end of file)");
}

Bus parse_bus_record(std::size_t line_no, const std::string& line) {
  if (line.size() < 18) {
    throw ParseError("line " + std::to_string(line_no) + ": bus record too short");
  }
  Bus bus;
  const auto id_tokens = tokenize(line.substr(0, 5));
  if (id_tokens.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": missing bus number");
  }
  bus.id = to_int(id_tokens.front(), line_no, "bus number");
  bus.name = trim(line.substr(5, 12));
  // Columns after the name: area, zone, type, |V|, angle, load MW, load MVAR, gen MW, ...
  const auto tokens = tokenize(line.substr(17));
  if (tokens.size() < 8) {
    throw ParseError("line " + std::to_string(line_no) + ": bus record has " +
                     std::to_string(tokens.size()) + " numeric fields, expected at least 8");
  }
  bus.cdf_type = to_int(tokens[2], line_no, "bus type");
  bus.load_mw = to_double(tokens[5], line_no, "load MW");
  bus.generation_mw = to_double(tokens[7], line_no, "generation MW");
  return bus;
}

Line parse_branch_record(std::size_t line_no, const std::string& line, const CdfOptions& options) {
  const auto tokens = tokenize(line);
  if (tokens.size() < 10) {
    throw ParseError("line " + std::to_string(line_no) + ": branch record has " +
                     std::to_string(tokens.size()) + " fields, expected at least 10");
  }
  Line branch;
  branch.from_bus = to_int(tokens[0], line_no, "from bus");
  branch.to_bus = to_int(tokens[1], line_no, "to bus");
  branch.resistance = to_double(tokens[6], line_no, "resistance");
  branch.reactance = to_double(tokens[7], line_no, "reactance");
  branch.charging = to_double(tokens[8], line_no, "line charging");
  const double rating = to_double(tokens[9], line_no, "MVA rating");
  if (branch.reactance <= 0.0) {
    throw ValidationError("line " + std::to_string(line_no) + ": branch " +
                          std::to_string(branch.from_bus) + "-" + std::to_string(branch.to_bus) +
                          " has non-positive reactance");
  }
  if (rating < 0.0) {
    throw ValidationError("line " + std::to_string(line_no) + ": negative MVA rating");
  }
  branch.nominal_capacity = rating > 0.0 ? rating : options.default_line_capacity_mw;
  if (branch.nominal_capacity <= 0.0) {
    throw ValidationError("default line capacity must be positive");
  }
  branch.current_capacity = branch.nominal_capacity;
  return branch;
}

}  // namespace

GridModel parse_cdf(std::istream& in, const CdfOptions& options) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.empty()) throw ParseError("empty case file");

  GridModel model;
  model.title = trim(lines.front());
  std::size_t cursor = 1;
  const Section bus_section = read_section(lines, cursor, "BUS DATA FOLLOWS", "bus data");
  const Section branch_section = read_section(lines, cursor, "BRANCH DATA FOLLOWS", "branch data");

  std::set<int> seen;
  for (const auto& [line_no, text] : bus_section.records) {
    Bus bus = parse_bus_record(line_no, text);
    if (!seen.insert(bus.id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate bus id " +
                            std::to_string(bus.id));
    }
    model.buses.push_back(std::move(bus));
  }
  if (model.buses.empty()) throw ValidationError("case has no buses");
  for (const auto& [line_no, text] : branch_section.records) {
    Line branch = parse_branch_record(line_no, text, options);
    if (!seen.count(branch.from_bus) || !seen.count(branch.to_bus)) {
      throw ValidationError("line " + std::to_string(line_no) + ": branch references unknown bus");
    }
    if (branch.from_bus == branch.to_bus) {
      throw ValidationError("line " + std::to_string(line_no) + ": branch is a self loop");
    }
    model.lines.push_back(branch);
  }
  model.assign_default_entities();
  return model;
}

GridModel parse_cdf_text(const std::string& text, const CdfOptions& options) {
  std::istringstream in(text);
  return parse_cdf(in, options);
}

GridModel parse_cdf_file(const std::string& path, const CdfOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file '" + path + "'");
  return parse_cdf(in, options);
}

std::string serialize_cdf(const GridModel& model) {
  std::ostringstream out;
  char buf[256];
  out << ' ' << model.title << '\n';
  out << "BUS DATA FOLLOWS                            " << model.buses.size() << " ITEMS\n";
  for (const auto& bus : model.buses) {
    std::snprintf(buf, sizeof buf, "%4d %-12.12s  1  1 %2d 1.000    0.00 %.12g 0.0 %.12g 0.0",
                  bus.id, bus.name.c_str(), bus.cdf_type, bus.load_mw, bus.generation_mw);
    out << buf << '\n';
  }
  out << "-999\n";
  out << "BRANCH DATA FOLLOWS                         " << model.lines.size() << " ITEMS\n";
  for (const auto& line : model.lines) {
    std::snprintf(buf, sizeof buf, "%4d %4d  1  1 1 0 %.17g %.17g %.17g %.17g", line.from_bus,
                  line.to_bus, line.resistance, line.reactance, line.charging,
                  line.nominal_capacity);
    out << buf << '\n';
  }
  out << "-999\n";
  out << "END OF DATA\n";
  return out.str();
}

bool structurally_equal(const GridModel& a, const GridModel& b, double tol) {
  if (a.buses.size() != b.buses.size() || a.lines.size() != b.lines.size()) return false;
  for (std::size_t k = 0; k < a.buses.size(); ++k) {
    const Bus& x = a.buses[k];
    const Bus& y = b.buses[k];
    if (x.id != y.id || x.kind != y.kind || x.attached_entity != y.attached_entity ||
        x.cdf_type != y.cdf_type || std::abs(x.load_mw - y.load_mw) > tol) {
      return false;
    }
  }
  for (std::size_t k = 0; k < a.lines.size(); ++k) {
    const Line& x = a.lines[k];
    const Line& y = b.lines[k];
    if (x.from_bus != y.from_bus || x.to_bus != y.to_bus ||
        std::abs(x.reactance - y.reactance) > tol ||
        std::abs(x.nominal_capacity - y.nominal_capacity) > tol ||
        std::abs(x.current_capacity - y.current_capacity) > tol) {
      return false;
    }
  }
  return a.generator_buses() == b.generator_buses() && a.aggregator_buses() == b.aggregator_buses();
}

int default_slack_bus(const GridModel& model) {
  if (!model.generator_buses().empty()) {
    return *std::min_element(model.generator_buses().begin(), model.generator_buses().end());
  }
  if (model.buses.empty()) throw ValidationError("case has no buses");
  int best = model.buses.front().id;
  for (const auto& bus : model.buses) best = std::min(best, bus.id);
  return best;
}

GridModel with_degraded_line(const GridModel& model, std::size_t index, double factor) {
  if (index >= model.lines.size()) {
    throw DomainError("line index " + std::to_string(index) + " out of range");
  }
  GridModel out = model;
  for (auto& line : out.lines) line.current_capacity = line.nominal_capacity;
  out.lines[index].current_capacity = factor * out.lines[index].nominal_capacity;
  return out;
}

std::size_t draw_degraded_line(std::size_t line_count, std::mt19937_64& rng) {
  if (line_count == 0) throw DomainError("degradation needs at least one line");
  std::uniform_int_distribution<std::size_t> pick(0, line_count - 1);
  return pick(rng);
}

GridModel degrade_line(const GridModel& model, std::mt19937_64& rng, double factor) {
  return with_degraded_line(model, draw_degraded_line(model.lines.size(), rng), factor);
}

}  // namespace fdsm
