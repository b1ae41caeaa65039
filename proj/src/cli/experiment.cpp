#include "fdsm/cli/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>
#include <tuple>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

std::string joined(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + num(v[i]);
  return out;
}

bool uses(const ExperimentConfig& c, StrategyKind k) {
  return std::find(c.schemes.begin(), c.schemes.end(), k) != c.schemes.end();
}

struct SweepPoint {
  std::string storage;
  std::vector<double> capacities;
  double uncertainty = 0.0;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
  std::vector<SweepPoint> out;
  std::vector<std::pair<std::string, std::vector<double>>> storage;
  if (!c.storage_assignment.empty()) {
    storage.emplace_back(joined(c.storage_assignment), c.storage_assignment);
  } else {
    for (double s : c.storage_sweep) storage.emplace_back(num(s), std::vector<double>{s});
  }
  for (const auto& [label, caps] : storage) {
    for (double u : c.uncertainty_sweep) out.push_back({label, caps, u});
  }
  return out;
}

// Solved decision makers of one sweep point.
struct Solvers {
  std::unique_ptr<Coordinator> proposed;
  std::unique_ptr<Coordinator> mumdp;
  std::unique_ptr<CentralizedPlanner> centralized;
  bool centralized_intractable = false;
};

Solvers solve_point(const ExperimentConfig& c, const DsmSystem& sys, const SweepPoint& point,
                    ExperimentResult& result, std::ostream* log) {
  Solvers s;
  // Myopic and Lyapunov aggregators see the proposed scheme's prices.
  const bool needs_prices =
      uses(c, StrategyKind::proposed) || uses(c, StrategyKind::myopic) || uses(c, StrategyKind::lyapunov);
  auto converge = [&](StrategyKind kind, const CoordinatorOptions& options) {
    auto coord = std::make_unique<Coordinator>(sys, options);
    for (const auto& summary : coord->run_exact()) {
      result.convergence.push_back({kind, point.storage, point.uncertainty, summary});
    }
    if (log) {
      const auto& last = result.convergence.back().summary;
      *log << "  " << strategy_name(kind) << ": " << last.iteration + 1 << " iterations, max violation "
           << num(last.max_violation) << (last.converged ? ", converged" : "") << "\n";
    }
    return coord;
  };
  // The centralized bound is checked first: it is cheap and may abort the run.
  if (uses(c, StrategyKind::centralized)) {
    s.centralized = std::make_unique<CentralizedPlanner>(sys);
    try {
      SolveOptions options;
      options.discount = c.coordinator.discount;
      options.tolerance = c.coordinator.solve_tolerance;
      s.centralized->solve(options, c.state_limit);
    } catch (const IntractableError& e) {
      if (!c.skip_intractable) throw;
      if (log) *log << "  centralized: skipped, " << e.state_count << " joint states\n";
      s.centralized.reset();
      s.centralized_intractable = true;
    }
  }
  if (needs_prices) s.proposed = converge(StrategyKind::proposed, c.coordinator);
  if (uses(c, StrategyKind::mumdp)) s.mumdp = converge(StrategyKind::mumdp, mumdp_options(c.coordinator));
  return s;
}

void add_policy_rows(const ExperimentConfig& c, const DsmSystem& sys, const Solvers& solvers, const SweepPoint& point,
                     ExperimentResult& result) {
  if (c.policy_aggregator >= sys.aggregators.size()) {
    throw ValidationError("experiment.policy_aggregator: index " + std::to_string(c.policy_aggregator) +
                          " outside [0, " + std::to_string(sys.aggregators.size()) + ")");
  }
  const IsoKeySpace keys(sys);
  const std::size_t i = c.policy_aggregator;
  const AggregatorModel& m = sys.aggregators[i];
  for (StrategyKind kind : c.schemes) {
    if (kind == StrategyKind::centralized) continue;  // decides on the joint state only
    const Coordinator* pricing = kind == StrategyKind::mumdp ? solvers.mumdp.get() : solvers.proposed.get();
    for (std::size_t s = 0; s < m.mdp().state_count(); ++s) {
      const AggregatorState st = m.state(s);
      for (std::size_t key = 0; key < keys.size(); ++key) {
        if (keys.hour_of(key) != st.hour) continue;
        const double price = quantize_price(pricing->aggregator_price(i, key), pricing->options().price_resolution);
        std::size_t choice = 0;
        if (kind == StrategyKind::myopic) {
          choice = myopic_decide(m, s, price);
        } else if (kind == StrategyKind::lyapunov) {
          choice = lyapunov_decide(m, s, price, c.drift);
        } else {
          choice = pricing->aggregator_choice(i, s, key);
        }
        PolicyRow row;
        row.scheme = kind;
        row.storage = point.storage;
        row.uncertainty = point.uncertainty;
        row.aggregator = i;
        row.state = s;
        row.hour = st.hour;
        row.demand = m.demand_mw(st);
        row.storage_level = m.storage_mw(st);
        row.iso_state = key;
        const auto levels = keys.renewable_levels(key);
        for (std::size_t g = 0; g < levels.size(); ++g) {
          row.renewable.push_back(sys.generators[g].renewable_spec().capacity_levels[levels[g]]);
        }
        row.derated_line = sys.degrade_lines ? keys.line_of(key) + 1 : 0;
        row.purchase = m.mdp().amount(choice);
        result.policies.push_back(std::move(row));
      }
    }
  }
}

struct SeedOutput {
  std::vector<CostRow> costs;
  std::vector<PriceRow> prices;
  std::vector<TraceFile> traces;
};

SeedOutput run_seed(const ExperimentConfig& c, const DsmSystem& sys, const Solvers& solvers, const SweepPoint& point,
                    std::uint64_t seed) {
  SeedOutput out;
  const StrategySet set{solvers.proposed.get(), solvers.mumdp.get(), solvers.centralized.get(), c.drift};
  for (StrategyKind kind : c.schemes) {
    CostRow row;
    row.scheme = kind;
    row.storage = point.storage;
    row.uncertainty = point.uncertainty;
    row.seed = seed;
    if (kind == StrategyKind::centralized && solvers.centralized_intractable) {
      row.intractable = true;
      out.costs.push_back(std::move(row));
      continue;
    }
    EpisodeOptions options;
    options.strategy = kind;
    options.horizon = c.horizon;
    options.seed = seed;
    const EpisodeTrace trace = run_episode(sys, set, options);
    row.report = cost_report(sys, trace, c.coordinator.discount);
    if (c.traces == TraceOutput::all || (c.traces == TraceOutput::flagged && row.report.flagged > 0)) {
      std::ostringstream text;
      write_trace_csv(text, trace);
      out.traces.push_back({std::string(strategy_name(kind)) + "_storage" + point.storage + "_uncertainty" +
                                num(point.uncertainty) + "_seed" + std::to_string(seed) + ".csv",
                            text.str()});
    }
    if (kind == StrategyKind::proposed && c.prices) {
      const LmpEstimate lmp = estimate_lmp(sys, trace, c.scenario.action_step);
      for (std::size_t i = 0; i < lmp.expected_lmp.size(); ++i) {
        out.prices.push_back({point.storage, point.uncertainty, seed, i, sys.grid.aggregator_buses()[i],
                              lmp.conjectured[i], lmp.expected_lmp[i], lmp.used, lmp.skipped});
      }
    }
    out.costs.push_back(std::move(row));
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c, std::ostream* log) {
  ExperimentResult result;
  const GridModel grid = load_grid(c.scenario);
  const std::size_t threads =
      std::max<std::size_t>(1, c.threads > 0 ? c.threads : std::thread::hardware_concurrency());
  for (const SweepPoint& point : sweep_points(c)) {
    if (log) *log << "storage " << point.storage << " MW, uncertainty " << num(point.uncertainty) << " MW\n";
    ScenarioSpec spec = c.scenario;
    spec.storage_capacity = point.capacities;
    spec.renewable_deviation = point.uncertainty;
    const DsmSystem sys = build_system(spec, grid);
    const Solvers solvers = solve_point(c, sys, point, result, log);
    if (c.policy_table) add_policy_rows(c, sys, solvers, point, result);

    // Seeds run in batches; results are collected in seed order.
    for (std::size_t first = 0; first < c.seeds; first += threads) {
      std::vector<std::future<SeedOutput>> batch;
      for (std::size_t k = first; k < std::min(c.seeds, first + threads); ++k) {
        const std::uint64_t seed = c.first_seed + k;
        batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                   [&, seed] { return run_seed(c, sys, solvers, point, seed); }));
      }
      for (auto& f : batch) {
        SeedOutput o = f.get();
        result.costs.insert(result.costs.end(), o.costs.begin(), o.costs.end());
        result.prices.insert(result.prices.end(), o.prices.begin(), o.prices.end());
        for (auto& t : o.traces) result.traces.push_back(std::move(t));
      }
    }
  }
  return result;
}

void write_costs_csv(std::ostream& out, const std::vector<CostRow>& rows) {
  out << "scheme,storage_mw,uncertainty_mw,seed,status,normalized_cost,normalized_discounted_cost,total_cost,"
         "flagged_periods,mean_price,aggregator_costs\n";
  for (const auto& r : rows) {
    out << strategy_name(r.scheme) << "," << r.storage << "," << num(r.uncertainty) << "," << r.seed << ",";
    if (r.intractable) {
      out << "intractable,,,,,,\n";
      continue;
    }
    out << "ok," << num(r.report.normalized) << "," << num(r.report.normalized_discounted) << ","
        << num(r.report.total) << "," << r.report.flagged << "," << num(r.report.mean_price) << ","
        << joined(r.report.aggregator_average) << "\n";
  }
}

void write_prices_csv(std::ostream& out, const std::vector<PriceRow>& rows) {
  out << "storage_mw,uncertainty_mw,seed,aggregator,bus,conjectured_price,expected_lmp,periods_used,periods_skipped\n";
  for (const auto& r : rows) {
    out << r.storage << "," << num(r.uncertainty) << "," << r.seed << "," << r.aggregator << "," << r.bus << ","
        << num(r.conjectured) << "," << num(r.expected_lmp) << "," << r.used << "," << r.skipped << "\n";
  }
}

void write_policy_csv(std::ostream& out, const std::vector<PolicyRow>& rows) {
  out << "scheme,storage_mw,uncertainty_mw,aggregator,state,hour,demand_mw,storage_level_mw,iso_state,renewable_mw,"
         "derated_line,purchase_mw\n";
  for (const auto& r : rows) {
    out << strategy_name(r.scheme) << "," << r.storage << "," << num(r.uncertainty) << "," << r.aggregator << ","
        << r.state << "," << r.hour << "," << num(r.demand) << "," << num(r.storage_level) << "," << r.iso_state << ","
        << joined(r.renewable) << "," << r.derated_line << "," << num(r.purchase) << "\n";
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "scheme,storage_mw,uncertainty_mw,iteration,max_value_change,max_violation,mean_supply_multiplier,"
         "max_residual,converged\n";
  for (const auto& r : rows) {
    out << strategy_name(r.scheme) << "," << r.storage << "," << num(r.uncertainty) << "," << r.summary.iteration
        << "," << num(r.summary.max_value_change) << "," << num(r.summary.max_violation) << ","
        << num(r.summary.mean_supply_multiplier) << "," << num(r.summary.max_residual) << ","
        << (r.summary.converged ? 1 : 0) << "\n";
  }
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result, const std::string& dir) {
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error("cannot write " + (fs::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("costs.csv");
    write_costs_csv(out, result.costs);
  }
  {
    auto out = open("prices.csv");
    write_prices_csv(out, result.prices);
  }
  {
    auto out = open("policy_table.csv");
    write_policy_csv(out, result.policies);
  }
  {
    auto out = open("convergence.csv");
    write_convergence_csv(out, result.convergence);
  }
  {
    auto out = open("config.ini");
    out << format_config(config);
  }
  if (!result.traces.empty()) {
    fs::create_directories(fs::path(dir) / "traces");
    for (const auto& t : result.traces) {
      auto out = open((fs::path("traces") / t.name).string());
      out << t.text;
    }
  }
}

std::string summary_table(const ExperimentResult& result) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t flagged = 0;
    bool intractable = false;
  };
  std::vector<std::tuple<std::string, double, StrategyKind>> order;
  std::map<std::tuple<std::string, double, StrategyKind>, Acc> acc;
  for (const auto& r : result.costs) {
    const auto key = std::make_tuple(r.storage, r.uncertainty, r.scheme);
    if (!acc.count(key)) order.push_back(key);
    Acc& a = acc[key];
    if (r.intractable) {
      a.intractable = true;
      continue;
    }
    a.sum += r.report.normalized;
    a.flagged += r.report.flagged;
    ++a.n;
  }
  std::ostringstream out;
  out << std::left << std::setw(12) << "storage" << std::setw(13) << "uncertainty" << std::setw(13) << "scheme"
      << std::setw(16) << "mean cost" << "flagged\n";
  for (const auto& key : order) {
    const Acc& a = acc[key];
    out << std::left << std::setw(12) << std::get<0>(key) << std::setw(13) << num(std::get<1>(key)) << std::setw(13)
        << strategy_name(std::get<2>(key));
    if (a.intractable) {
      out << "intractable\n";
    } else {
      std::ostringstream cost;
      cost << std::fixed << std::setprecision(3) << a.sum / static_cast<double>(a.n);
      out << std::setw(16) << cost.str() << a.flagged << "\n";
    }
  }
  return out.str();
}

}  // namespace fdsm
