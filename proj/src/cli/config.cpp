#include "fdsm/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<double> to_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

std::string number_text(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

template <class T>
std::string join(const std::vector<T>& values, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + f(values[i]);
  return out;
}

std::string number_list(const std::vector<double>& v) {
  return join<double>(v, [](const double& x) { return number_text(x); });
}

std::string int_list(const std::vector<int>& v) {
  return join<int>(v, [](const int& x) { return std::to_string(x); });
}

// Field table: how to read a key into the config and how to print it back.
struct Field {
  std::string section;
  std::string key;
  // Returns an error message, empty on success.
  std::function<std::string(ExperimentConfig&, const std::string&)> read;
  std::function<std::string(const ExperimentConfig&)> write;
};

struct Range {
  double low;
  double high;
  bool low_open;
  bool high_open;

  bool contains(double v) const {
    return (low_open ? v > low : v >= low) && (high_open ? v < high : v <= high);
  }
  std::string describe() const {
    return std::string(low_open ? "(" : "[") + number_text(low) + ", " + number_text(high) + (high_open ? ")" : "]");
  }
};

constexpr double kInf = std::numeric_limits<double>::infinity();
const Range kNonNegative{0.0, kInf, false, true};
const Range kPositive{0.0, kInf, true, true};

template <class Ref>
Field real(std::string section, std::string key, Ref ref, Range range) {
  return {std::move(section), std::move(key),
          [ref, range](ExperimentConfig& c, const std::string& v) -> std::string {
            const auto x = to_double(v);
            if (!x) return "expected a number, got '" + v + "'";
            if (!range.contains(*x)) return "value " + v + " outside " + range.describe();
            ref(c) = *x;
            return {};
          },
          [ref](const ExperimentConfig& c) { return number_text(ref(c)); }};
}

template <class Ref>
Field count(std::string section, std::string key, Ref ref,
            long long low, long long high = std::numeric_limits<long long>::max()) {
  return {std::move(section), std::move(key),
          [ref, low, high](ExperimentConfig& c, const std::string& v) -> std::string {
            const auto x = to_integer(v);
            if (!x) return "expected an integer, got '" + v + "'";
            if (*x < low || *x > high) {
              return "value " + v + " outside [" + std::to_string(low) + ", " +
                     (high == std::numeric_limits<long long>::max() ? std::string("inf") : std::to_string(high)) + "]";
            }
            ref(c) = static_cast<std::size_t>(*x);
            return {};
          },
          [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); }};
}

template <class Ref>
Field flag(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key),
          [ref](ExperimentConfig& c, const std::string& v) -> std::string {
            const auto x = to_bool(v);
            if (!x) return "expected true or false, got '" + v + "'";
            ref(c) = *x;
            return {};
          },
          [ref](const ExperimentConfig& c) { return ref(c) ? "true" : "false"; }};
}

template <class Ref>
Field reals(std::string section, std::string key, Ref ref,
            Range range, bool allow_empty) {
  return {std::move(section), std::move(key),
          [ref, range, allow_empty](ExperimentConfig& c, const std::string& v) -> std::string {
            std::vector<double> out;
            for (const auto& item : split_list(v)) {
              const auto x = to_double(item);
              if (!x) return "expected a number list, got '" + item + "'";
              if (!range.contains(*x)) return "entry " + item + " outside " + range.describe();
              out.push_back(*x);
            }
            if (out.empty() && !allow_empty) return "list must not be empty";
            ref(c) = std::move(out);
            return {};
          },
          [ref](const ExperimentConfig& c) { return number_list(ref(c)); }};
}

template <class Ref>
Field buses(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key),
          [ref](ExperimentConfig& c, const std::string& v) -> std::string {
            std::vector<int> out;
            for (const auto& item : split_list(v)) {
              const auto x = to_integer(item);
              if (!x || *x < 1) return "expected positive bus numbers, got '" + item + "'";
              out.push_back(static_cast<int>(*x));
            }
            ref(c) = std::move(out);
            return {};
          },
          [ref](const ExperimentConfig& c) { return int_list(ref(c)); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    using C = ExperimentConfig;
    // [experiment]
    f.push_back({"experiment", "name",
                 [](C& c, const std::string& v) -> std::string {
                   if (v.empty()) return "name must not be empty";
                   if (v.find_first_of("/\\") != std::string::npos) return "name must not contain path separators";
                   c.name = v;
                   return {};
                 },
                 [](const C& c) { return c.name; }});
    f.push_back({"experiment", "kind",
                 [](C& c, const std::string& v) -> std::string {
                   if (v == "sweep") {
                     c.kind = ExperimentKind::sweep;
                   } else if (v == "policy_table") {
                     c.kind = ExperimentKind::policy_table;
                   } else {
                     return "expected sweep or policy_table, got '" + v + "'";
                   }
                   return {};
                 },
                 [](const C& c) { return std::string(c.kind == ExperimentKind::sweep ? "sweep" : "policy_table"); }});
    f.push_back({"experiment", "schemes",
                 [](C& c, const std::string& v) -> std::string {
                   std::vector<StrategyKind> out;
                   for (const auto& item : split_list(v)) {
                     const auto k = parse_strategy(item);
                     if (!k) return "unknown scheme '" + item + "' (proposed, centralized, myopic, lyapunov, mumdp)";
                     for (StrategyKind seen : out) {
                       if (seen == *k) return "scheme '" + item + "' listed twice";
                     }
                     out.push_back(*k);
                   }
                   if (out.empty()) return "list must not be empty";
                   c.schemes = std::move(out);
                   return {};
                 },
                 [](const C& c) {
                   return join<StrategyKind>(c.schemes,
                                             [](const StrategyKind& k) { return std::string(strategy_name(k)); });
                 }});
    f.push_back(count("experiment", "seeds", [](auto& c) -> auto& { return c.seeds; }, 1));
    f.push_back({"experiment", "first_seed",
                 [](C& c, const std::string& v) -> std::string {
                   const auto x = to_integer(v);
                   if (!x || *x < 0) return "expected a non-negative integer, got '" + v + "'";
                   c.first_seed = static_cast<std::uint64_t>(*x);
                   return {};
                 },
                 [](const C& c) { return std::to_string(c.first_seed); }});
    f.push_back(count("experiment", "horizon", [](auto& c) -> auto& { return c.horizon; }, 1));
    f.push_back({"experiment", "discount",
                 [](C& c, const std::string& v) -> std::string {
                   const auto x = to_double(v);
                   if (!x) return "expected a number, got '" + v + "'";
                   if (*x >= 1.0) return "discount must be < 1";
                   if (*x < 0.0) return "discount must be >= 0";
                   c.coordinator.discount = *x;
                   return {};
                 },
                 [](const C& c) { return number_text(c.coordinator.discount); }});
    f.push_back(flag("experiment", "skip_intractable", [](auto& c) -> auto& { return c.skip_intractable; }));
    f.push_back(count("experiment", "state_limit", [](auto& c) -> auto& { return c.state_limit; }, 1));
    f.push_back({"experiment", "drift",
                 [](C& c, const std::string& v) -> std::string {
                   if (v == "with_demand") {
                     c.drift = DriftForm::with_demand;
                   } else if (v == "without_demand") {
                     c.drift = DriftForm::without_demand;
                   } else {
                     return "expected with_demand or without_demand, got '" + v + "'";
                   }
                   return {};
                 },
                 [](const C& c) {
                   return std::string(c.drift == DriftForm::with_demand ? "with_demand" : "without_demand");
                 }});
    f.push_back(flag("experiment", "prices", [](auto& c) -> auto& { return c.prices; }));
    f.push_back(flag("experiment", "policy_table", [](auto& c) -> auto& { return c.policy_table; }));
    f.push_back({"experiment", "traces",
                 [](C& c, const std::string& v) -> std::string {
                   if (v == "none") {
                     c.traces = TraceOutput::none;
                   } else if (v == "flagged") {
                     c.traces = TraceOutput::flagged;
                   } else if (v == "all") {
                     c.traces = TraceOutput::all;
                   } else {
                     return "expected none, flagged or all, got '" + v + "'";
                   }
                   return {};
                 },
                 [](const C& c) {
                   return std::string(c.traces == TraceOutput::none ? "none"
                                      : c.traces == TraceOutput::all ? "all"
                                                                     : "flagged");
                 }});
    f.push_back(count("experiment", "policy_aggregator", [](auto& c) -> auto& { return c.policy_aggregator; }, 0));
    f.push_back(count("experiment", "threads", [](auto& c) -> auto& { return c.threads; }, 0));
    f.push_back({"experiment", "output",
                 [](C& c, const std::string& v) -> std::string {
                   c.output = v;
                   return {};
                 },
                 [](const C& c) { return c.output; }});

    // [system]
    f.push_back({"system", "case",
                 [](C& c, const std::string& v) -> std::string {
                   if (v.empty()) return "case file must be given";
                   c.scenario.case_path = v;
                   return {};
                 },
                 [](const C& c) { return c.scenario.case_path; }});
    f.push_back(real("system", "line_capacity", [](auto& c) -> auto& { return c.scenario.default_line_capacity; },
                     kPositive));
    f.push_back(flag("system", "degrade_lines", [](auto& c) -> auto& { return c.scenario.degrade_lines; }));
    f.push_back(real("system", "degrade_factor", [](auto& c) -> auto& { return c.scenario.degrade_factor; },
                     Range{0.0, 1.0, true, false}));
    f.push_back(count("system", "clock_count", [](auto& c) -> auto& { return c.scenario.clock_count; }, 1, 168));
    f.push_back(buses("system", "generator_buses", [](auto& c) -> auto& { return c.scenario.generator_buses; }));
    f.push_back(
        buses("system", "aggregator_buses", [](auto& c) -> auto& { return c.scenario.aggregator_buses; }));

    // [demand]
    f.push_back(real("demand", "peak_mean", [](auto& c) -> auto& { return c.scenario.demand.peak_mean; }, kNonNegative));
    f.push_back(
        real("demand", "offpeak_mean", [](auto& c) -> auto& { return c.scenario.demand.offpeak_mean; }, kNonNegative));
    f.push_back(real("demand", "mean_step", [](auto& c) -> auto& { return c.scenario.demand.mean_step; },
                     Range{-kInf, kInf, true, true}));
    f.push_back(
        real("demand", "peak_range", [](auto& c) -> auto& { return c.scenario.demand.peak_range; }, kNonNegative));
    f.push_back(
        real("demand", "offpeak_range", [](auto& c) -> auto& { return c.scenario.demand.offpeak_range; }, kNonNegative));
    f.push_back(
        count("demand", "peak_first", [](auto& c) -> auto& { return c.scenario.demand.peak_first; }, 0, 167));
    f.push_back(count("demand", "peak_last", [](auto& c) -> auto& { return c.scenario.demand.peak_last; }, 0, 167));
    f.push_back(count("demand", "levels", [](auto& c) -> auto& { return c.scenario.demand.levels; }, 1, 1000));
    f.push_back(real("demand", "quantum", [](auto& c) -> auto& { return c.scenario.demand.quantum; }, kNonNegative));

    // [storage]
    f.push_back(
        reals("storage", "capacities", [](auto& c) -> auto& { return c.storage_sweep; }, kNonNegative, false));
    f.push_back(reals("storage", "assignment", [](auto& c) -> auto& { return c.storage_assignment; },
                      kNonNegative, true));
    f.push_back(real("storage", "step", [](auto& c) -> auto& { return c.scenario.storage_step; }, kPositive));
    f.push_back(real("storage", "action_step", [](auto& c) -> auto& { return c.scenario.action_step; }, kPositive));
    f.push_back({"storage", "action_max",
                 [](C& c, const std::string& v) -> std::string {
                   if (v == "auto") {
                     c.scenario.action_max.reset();
                     return {};
                   }
                   const auto x = to_double(v);
                   if (!x || !(*x >= 0.0) || std::isinf(*x)) return "expected auto or a finite number >= 0, got '" + v + "'";
                   c.scenario.action_max = *x;
                   return {};
                 },
                 [](const C& c) {
                   return c.scenario.action_max ? number_text(*c.scenario.action_max) : std::string("auto");
                 }});
    f.push_back(real("storage", "cost", [](auto& c) -> auto& { return c.scenario.storage_cost; }, kNonNegative));
    f.push_back(real("storage", "penalty", [](auto& c) -> auto& { return c.scenario.penalty; }, kNonNegative));

    // [generation]
    f.push_back(count("generation", "renewables", [](auto& c) -> auto& { return c.scenario.renewable_count; }, 0));
    f.push_back(
        real("generation", "renewable_mean", [](auto& c) -> auto& { return c.scenario.renewable_mean; }, kNonNegative));
    f.push_back(reals("generation", "uncertainty", [](auto& c) -> auto& { return c.uncertainty_sweep; },
                      kNonNegative, false));
    f.push_back(count("generation", "renewable_levels",
                      [](auto& c) -> auto& { return c.scenario.renewable_levels; }, 1, 1000));
    f.push_back(
        real("generation", "renewable_step", [](auto& c) -> auto& { return c.scenario.renewable_step; }, kPositive));
    f.push_back(
        real("generation", "conventional_max", [](auto& c) -> auto& { return c.scenario.conventional_max; }, kPositive));
    f.push_back(real("generation", "conventional_step", [](auto& c) -> auto& { return c.scenario.conventional_step; },
                     kPositive));
    f.push_back(real("generation", "quadratic", [](auto& c) -> auto& { return c.scenario.quadratic; }, kNonNegative));
    f.push_back(real("generation", "linear", [](auto& c) -> auto& { return c.scenario.linear; }, kNonNegative));
    f.push_back(real("generation", "ramp", [](auto& c) -> auto& { return c.scenario.ramp; }, kNonNegative));

    // [coordinator]
    f.push_back(count("coordinator", "max_iterations",
                      [](auto& c) -> auto& { return c.coordinator.max_iterations; }, 1));
    f.push_back(count("coordinator", "min_iterations",
                      [](auto& c) -> auto& { return c.coordinator.min_iterations; }, 1));
    f.push_back(
        real("coordinator", "step_scale", [](auto& c) -> auto& { return c.coordinator.step_scale; }, kPositive));
    f.push_back(real("coordinator", "tolerance", [](auto& c) -> auto& { return c.coordinator.convergence_tolerance; },
                     Range{0.0, kInf, false, false}));
    f.push_back(real("coordinator", "solve_tolerance", [](auto& c) -> auto& { return c.coordinator.solve_tolerance; },
                     kPositive));
    f.push_back(real("coordinator", "price_resolution",
                     [](auto& c) -> auto& { return c.coordinator.price_resolution; }, kPositive));
    return f;
  }();
  return table;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.scenario.case_path = "ieee14.cdf";
  c.scenario.renewable_mean = 100.0;
  c.scenario.renewable_levels = 3;
  c.scenario.renewable_step = 5.0;
  c.coordinator.max_iterations = 200;
  return c;
}

void cross_check(const ExperimentConfig& c, std::vector<ConfigIssue>& issues) {
  if (c.coordinator.min_iterations > c.coordinator.max_iterations) {
    issues.push_back({"coordinator.min_iterations", "must not exceed coordinator.max_iterations"});
  }
  if (c.scenario.demand.peak_first > c.scenario.demand.peak_last) {
    issues.push_back({"demand.peak_first", "must not exceed demand.peak_last"});
  }
  if (c.kind == ExperimentKind::policy_table && !c.policy_table) {
    issues.push_back({"experiment.policy_table", "must be true for kind = policy_table"});
  }
  const bool centralized =
      std::find(c.schemes.begin(), c.schemes.end(), StrategyKind::centralized) != c.schemes.end();
  if (centralized && c.state_limit == 0) {
    issues.push_back({"experiment.state_limit", "centralized scheme needs a positive product-state bound"});
  }
}


const std::vector<std::pair<std::string, std::string>>& presets() {
  static const std::vector<std::pair<std::string, std::string>> table{
      {"micro", R"([experiment]
name = micro
schemes = proposed, centralized, myopic, lyapunov, mumdp
seeds = 2
horizon = 48
policy_table = true
traces = none

[system]
case = toy3.cdf
line_capacity = 5
clock_count = 1
generator_buses = 1
aggregator_buses = 2, 3

[demand]
offpeak_mean = 3
offpeak_range = 1
mean_step = 0
levels = 2

[storage]
capacities = 1
penalty = 100

[generation]
conventional_max = 10
conventional_step = 1
ramp = 0

[coordinator]
max_iterations = 100
)"},
      {"fig4-toy", R"([experiment]
name = fig4-toy
schemes = centralized, proposed, lyapunov, myopic
seeds = 5
horizon = 500
discount = 0.9

[system]
case = toy3.cdf
line_capacity = 5
clock_count = 1
generator_buses = 1
aggregator_buses = 2, 3

[demand]
offpeak_mean = 3
offpeak_range = 1
mean_step = 0
levels = 2

[storage]
capacities = 0, 1, 2, 3
penalty = 100

[generation]
conventional_max = 10
conventional_step = 1
ramp = 0

[coordinator]
max_iterations = 300
)"},
      {"fig4-desk", R"([experiment]
name = fig4-desk
schemes = centralized, proposed, lyapunov, myopic
skip_intractable = true
traces = none

[system]
case = ieee14.cdf
line_capacity = 80

[demand]
quantum = 2.5

[storage]
capacities = 5, 15, 25, 35, 45
step = 2.5
action_step = 2.5

[coordinator]
max_iterations = 200
step_scale = 0.1
)"},
      {"fig7-desk", R"([experiment]
name = fig7-desk
schemes = proposed, lyapunov, myopic
seeds = 10
traces = none

[system]
case = ieee14.cdf
line_capacity = 80

[demand]
quantum = 2.5

[storage]
capacities = 25, 50
step = 2.5
action_step = 2.5

[generation]
renewables = 2
uncertainty = 0, 5, 10, 15, 20
renewable_levels = 2

[coordinator]
max_iterations = 100
step_scale = 0.1
)"},
      {"fig8-desk", R"([experiment]
name = fig8-desk
schemes = proposed
seeds = 10
traces = none

[system]
case = ieee14.cdf
line_capacity = 80

[demand]
quantum = 2.5

[storage]
assignment = 10, 50
step = 2.5
action_step = 2.5

[generation]
renewables = 2
uncertainty = 0, 10, 20
renewable_levels = 2

[coordinator]
max_iterations = 100
step_scale = 0.1
)"},
      {"table7", R"([experiment]
name = table7
kind = policy_table
schemes = proposed, mumdp, myopic, lyapunov
seeds = 5
horizon = 480
drift = without_demand
policy_table = true
prices = false

[system]
case = ieee14.cdf
line_capacity = 80
degrade_lines = false
clock_count = 1

[demand]
offpeak_mean = 50
offpeak_range = 5
mean_step = 0
levels = 3
quantum = 5

[storage]
capacities = 60
step = 30
action_step = 30
action_max = 60

[generation]
renewables = 1
uncertainty = 10
renewable_levels = 2

[coordinator]
max_iterations = 300
)"},
  };
  return table;
}

// Inline comments start at a ';' or '#' that follows whitespace.
std::string strip_comment(const std::string& value) {
  for (std::size_t k = 1; k < value.size(); ++k) {
    if ((value[k] == ';' || value[k] == '#') && std::isspace(static_cast<unsigned char>(value[k - 1]))) {
      return trim(std::string_view(value).substr(0, k));
    }
  }
  return trim(value);
}

}  // namespace

std::string ConfigResult::describe() const {
  std::string out;
  for (const auto& i : issues) out += i.path + ": " + i.message + "\n";
  return out;
}

std::string resolve_case_path(const std::string& path, const std::string& base_dir) {
  const fs::path p(path);
  if (p.is_absolute() || fs::exists(p)) return p.string();
  const fs::path near = fs::path(base_dir) / p;
  if (fs::exists(near)) return near.string();
  const fs::path bundled = fs::path(FDSM_DATA_DIR) / "cases" / p;
  if (fs::exists(bundled)) return bundled.string();
  return p.string();
}

ConfigResult validate_config(std::string_view text, const std::string& base_dir) {
  ConfigResult result;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    result.issues.push_back({"line " + std::to_string(e.line()), e.message()});
    return result;
  }

  std::map<std::string, std::map<std::string, const Field*>> known;
  for (const auto& f : fields()) known[f.section][f.key] = &f;

  ExperimentConfig config = default_config();
  for (const auto& [section, body] : tree) {
    const auto s = known.find(section);
    if (!body.data().empty() || s == known.end()) {
      result.issues.push_back({section, body.data().empty() ? "unknown section" : "key outside any section"});
      continue;
    }
    for (const auto& [key, value] : body) {
      const auto k = s->second.find(key);
      if (k == s->second.end()) {
        result.issues.push_back({section + "." + key, "unknown key"});
        continue;
      }
      const std::string message = k->second->read(config, strip_comment(value.data()));
      if (!message.empty()) result.issues.push_back({section + "." + key, message});
    }
  }
  cross_check(config, result.issues);
  const std::string resolved = resolve_case_path(config.scenario.case_path, base_dir);
  if (!fs::exists(resolved)) {
    result.issues.push_back({"system.case", "case file '" + config.scenario.case_path + "' not found"});
  } else {
    config.scenario.case_path = resolved;
  }
  if (result.issues.empty()) result.config = std::move(config);
  return result;
}

ConfigResult load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigResult r;
    r.issues.push_back({path, "cannot open config file"});
    return r;
  }
  std::ostringstream text;
  text << in.rdbuf();
  return validate_config(text.str(), fs::path(path).parent_path().string());
}

std::string set_config_value(ExperimentConfig& config, const std::string& path, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.section + "." + f.key == path) return f.read(config, trim(value));
  }
  return "unknown key " + path;
}

std::string format_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << "\n";
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = " << f.write(config) << "\n";
  }
  return out.str();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, text] : presets()) out.push_back(name);
    return out;
  }();
  return names;
}

std::optional<std::string> preset_text(std::string_view name) {
  for (const auto& [n, text] : presets()) {
    if (n == name) return text;
  }
  return std::nullopt;
}

}  // namespace fdsm
