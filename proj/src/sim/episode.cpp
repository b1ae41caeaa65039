#include "fdsm/sim/episode.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "fdsm/errors.hpp"
#include "fdsm/sim/dispatch.hpp"

namespace fdsm {

namespace {

std::size_t draw(const std::vector<double>& probabilities, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (u < probabilities[k]) return k;
    u -= probabilities[k];
  }
  return probabilities.size() - 1;
}

// Exogenous and endogenous state of the simulated system.
class Environment {
 public:
  Environment(const DsmSystem& system, const IsoKeySpace& keys, std::uint64_t seed)
      : system_(&system), keys_(&keys), rng_(seed) {
    for (const auto& a : system.aggregators) {
      const auto& p = a.spec().demand.probabilities[0];
      aggregators_.push_back({0, draw(p, rng_), 0});
    }
    previous_.assign(system.generators.size(), 0.0);
    levels_.assign(system.generators.size(), 0);
    draw_exogenous();
  }

  std::size_t hour() const { return hour_; }
  std::size_t line() const { return line_; }
  const std::vector<double>& previous() const { return previous_; }

  std::size_t key() const {
    std::vector<std::size_t> renewable;
    for (std::size_t g = 0; g < system_->generators.size(); ++g) {
      if (system_->generators[g].kind() == GeneratorKind::renewable) renewable.push_back(levels_[g]);
    }
    return keys_->key(hour_, renewable, line_);
  }

  std::vector<std::size_t> aggregator_states() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < aggregators_.size(); ++i) out.push_back(system_->aggregators[i].index(aggregators_[i]));
    return out;
  }

  std::vector<std::size_t> generator_states() const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < levels_.size(); ++g) out.push_back(system_->generators[g].index(hour_, levels_[g]));
    return out;
  }

  void advance(const std::vector<double>& delivered, const std::vector<double>& generation) {
    for (std::size_t i = 0; i < aggregators_.size(); ++i) {
      const AggregatorModel& m = system_->aggregators[i];
      const AggregatorState& s = aggregators_[i];
      const std::size_t next = draw(m.spec().demand.next_distribution(s.hour, s.demand_level), rng_);
      aggregators_[i] = m.storage_transition(s, delivered[i], next);
    }
    for (std::size_t g = 0; g < levels_.size(); ++g) {
      previous_[g] = generation[g];
      if (system_->generators[g].kind() == GeneratorKind::conventional) {
        levels_[g] = snap_to_grid(system_->generators[g].output_levels(), generation[g]);
      }
    }
    hour_ = (hour_ + 1) % system_->clock_count();
    draw_exogenous();
  }

 private:
  void draw_exogenous() {
    for (std::size_t g = 0; g < levels_.size(); ++g) {
      const GeneratorModel& gen = system_->generators[g];
      if (gen.kind() == GeneratorKind::renewable) levels_[g] = draw(gen.renewable_spec().capacity_probabilities, rng_);
    }
    if (keys_->line_outcomes() > 1) {
      line_ = std::uniform_int_distribution<std::size_t>(0, keys_->line_outcomes() - 1)(rng_);
    }
  }

  const DsmSystem* system_;
  const IsoKeySpace* keys_;
  std::mt19937_64 rng_;
  std::size_t hour_ = 0;
  std::size_t line_ = 0;
  std::vector<AggregatorState> aggregators_;
  std::vector<double> previous_;
  std::vector<std::size_t> levels_;  // previous-output level or renewable capacity level
};

double grid_step(const std::vector<double>& levels) { return levels.size() > 1 ? levels[1] - levels[0] : 0.0; }

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_strategies(const StrategySet& s, StrategyKind kind) {
  auto need = [](const Coordinator* c, const char* what) {
    if (c == nullptr) throw ModelError(std::string(what) + " strategy needs a coordinator");
    if (!c->solved()) throw ModelError(std::string(what) + " coordinator has not been solved");
  };
  switch (kind) {
    case StrategyKind::proposed:
      need(s.proposed, "proposed");
      break;
    case StrategyKind::mumdp:
      need(s.mumdp, "mumdp");
      break;
    case StrategyKind::centralized:
      if (s.centralized == nullptr || !s.centralized->solved()) throw ModelError("centralized strategy needs a solved planner");
      break;
    case StrategyKind::myopic:
    case StrategyKind::lyapunov:
      if (s.proposed != nullptr && !s.proposed->solved()) throw ModelError("price coordinator has not been solved");
      break;
  }
}

}  // namespace

double PeriodRecord::total_cost() const {
  double total = 0.0;
  for (double c : aggregator_costs) total += c;
  for (double c : generator_costs) total += c;
  return total;
}

std::size_t EpisodeTrace::flagged_periods() const {
  return static_cast<std::size_t>(std::count_if(periods.begin(), periods.end(), [](const auto& p) { return p.safeguard; }));
}

EpisodeTrace run_episode(const DsmSystem& system, const StrategySet& strategies, const EpisodeOptions& options) {
  if (options.horizon == 0) throw DomainError("horizon must be at least one period");
  check_strategies(strategies, options.strategy);
  const IsoKeySpace keys(system);
  const DispatchNetwork network = system.dispatch_network(options.shed_cost);
  const std::size_t aggs = system.aggregators.size();
  const std::size_t gens = system.generators.size();
  const Coordinator* pricing = options.strategy == StrategyKind::mumdp ? strategies.mumdp : strategies.proposed;

  Environment env(system, keys, options.seed);
  EpisodeTrace trace;
  trace.strategy = options.strategy;
  trace.seed = options.seed;
  trace.periods.reserve(options.horizon);

  for (std::size_t t = 0; t < options.horizon; ++t) {
    PeriodRecord rec;
    rec.period = t;
    rec.hour = env.hour();
    rec.key = env.key();
    rec.aggregator_states = env.aggregator_states();
    rec.generator_states = env.generator_states();
    rec.previous_output = env.previous();
    for (std::size_t g = 0; g < gens; ++g) rec.max_output.push_back(system.generators[g].max_output(rec.generator_states[g]));

    std::vector<std::size_t> plan;
    if (options.strategy == StrategyKind::centralized) {
      plan = strategies.centralized->decide(rec.generator_states, rec.aggregator_states,
                                            strategies.centralized->line_state(rec.hour, env.line()));
    }
    for (std::size_t i = 0; i < aggs; ++i) {
      const AggregatorModel& m = system.aggregators[i];
      const std::size_t s = rec.aggregator_states[i];
      const AggregatorState st = m.state(s);
      rec.demand.push_back(m.demand_mw(st));
      rec.storage.push_back(m.storage_mw(st));
      const double price =
          pricing ? quantize_price(pricing->aggregator_price(i, rec.key), pricing->options().price_resolution) : 0.0;
      rec.prices.push_back(price);
      std::size_t choice = 0;
      switch (options.strategy) {
        case StrategyKind::proposed:
        case StrategyKind::mumdp:
          choice = pricing->aggregator_choice(i, s, rec.key);
          break;
        case StrategyKind::myopic:
          choice = myopic_decide(m, s, price);
          break;
        case StrategyKind::lyapunov:
          choice = lyapunov_decide(m, s, price, strategies.drift);
          break;
        case StrategyKind::centralized:
          choice = plan[gens + i];
          break;
      }
      rec.purchases.push_back(m.mdp().amount(choice));
    }

    const std::vector<double> capacities = keys.capacities(rec.key);
    if (options.strategy == StrategyKind::centralized) {
      for (std::size_t g = 0; g < gens; ++g) rec.generation.push_back(system.generators[g].mdp().amount(plan[g]));
      rec.delivered = rec.purchases;
    } else {
      const DispatchResult d = economic_dispatch(network, {rec.purchases, rec.previous_output, rec.max_output, capacities});
      rec.generation = d.generation;
      for (std::size_t i = 0; i < aggs; ++i) rec.delivered.push_back(std::max(rec.purchases[i] - d.shed[i], 0.0));
      rec.safeguard = d.shed_any() || !d.converged;
      if (pricing && options.strategy != StrategyKind::myopic && options.strategy != StrategyKind::lyapunov) {
        for (std::size_t g = 0; g < gens; ++g) {
          const GeneratorModel& gm = system.generators[g];
          const double planned = gm.mdp().amount(pricing->generator_choice(g, rec.generator_states[g], rec.key));
          if (std::abs(planned - rec.generation[g]) > grid_step(gm.output_levels()) + 1e-6) rec.safeguard = true;
        }
      }
    }

    for (std::size_t i = 0; i < aggs; ++i) {
      rec.aggregator_costs.push_back(
          aggregator_stage_cost(system.aggregators[i].spec(), rec.demand[i], rec.storage[i], rec.delivered[i]));
    }
    for (std::size_t g = 0; g < gens; ++g) {
      rec.generator_costs.push_back(network.costs[g](rec.previous_output[g], rec.generation[g]));
    }
    const Eigen::VectorXd f =
        system.constraints.evaluate(as_vector(rec.generation), as_vector(rec.delivered), capacities);
    rec.constraint_values.assign(f.data(), f.data() + f.size());

    env.advance(rec.delivered, rec.generation);
    trace.periods.push_back(std::move(rec));
  }
  return trace;
}

double audit_trace(const DsmSystem& system, const EpisodeTrace& trace) {
  double worst = 0.0;
  for (const auto& p : trace.periods) {
    for (std::size_t i = 0; i < p.aggregator_costs.size(); ++i) {
      const double c = aggregator_stage_cost(system.aggregators[i].spec(), p.demand[i], p.storage[i], p.delivered[i]);
      worst = std::max(worst, std::abs(c - p.aggregator_costs[i]));
    }
    for (std::size_t g = 0; g < p.generator_costs.size(); ++g) {
      const double c = dispatch_cost(system.generators[g])(p.previous_output[g], p.generation[g]);
      worst = std::max(worst, std::abs(c - p.generator_costs[g]));
    }
  }
  return worst;
}

double discounted_total(const std::vector<double>& period_costs, double discount) {
  if (!(discount >= 0.0 && discount < 1.0)) throw DomainError("discount must be in [0, 1)");
  double total = 0.0;
  double weight = 1.0 - discount;
  for (double c : period_costs) {
    total += weight * c;
    weight *= discount;
  }
  return total;
}

double discounted_total(const EpisodeTrace& trace, double discount) {
  std::vector<double> costs;
  costs.reserve(trace.periods.size());
  for (const auto& p : trace.periods) costs.push_back(p.total_cost());
  return discounted_total(costs, discount);
}

CostReport cost_report(const DsmSystem& system, const EpisodeTrace& trace, double discount) {
  if (trace.periods.empty()) throw DomainError("empty trace");
  CostReport r;
  const double buses = static_cast<double>(system.grid.bus_count());
  const double hours = static_cast<double>(trace.periods.size());
  r.aggregator_average.assign(system.aggregators.size(), 0.0);
  double price_sum = 0.0;
  std::size_t price_count = 0;
  for (const auto& p : trace.periods) {
    r.total += p.total_cost();
    for (std::size_t i = 0; i < p.aggregator_costs.size(); ++i) r.aggregator_average[i] += p.aggregator_costs[i] / hours;
    for (double y : p.prices) {
      price_sum += y;
      ++price_count;
    }
  }
  r.normalized = r.total / buses / hours;
  r.discounted = discounted_total(trace, discount);
  r.normalized_discounted = r.discounted / buses;
  r.mean_price = price_count > 0 ? price_sum / static_cast<double>(price_count) : 0.0;
  r.flagged = trace.flagged_periods();
  return r;
}

LmpEstimate estimate_lmp(const DsmSystem& system, const EpisodeTrace& trace, double step, double shed_cost) {
  if (trace.periods.empty()) throw DomainError("empty trace");
  const IsoKeySpace keys(system);
  const DispatchNetwork network = system.dispatch_network(shed_cost);
  LmpEstimate out;
  const std::size_t aggs = system.aggregators.size();
  out.expected_lmp.assign(aggs, 0.0);
  out.conjectured.assign(aggs, 0.0);
  for (const auto& p : trace.periods) {
    const auto lmp = locational_prices(network, {p.purchases, p.previous_output, p.max_output, keys.capacities(p.key)}, step);
    if (!lmp) {
      ++out.skipped;
      continue;
    }
    ++out.used;
    for (std::size_t i = 0; i < aggs; ++i) {
      out.expected_lmp[i] += (*lmp)[i];
      out.conjectured[i] += p.prices[i];
    }
  }
  if (out.used > 0) {
    for (std::size_t i = 0; i < aggs; ++i) {
      out.expected_lmp[i] /= static_cast<double>(out.used);
      out.conjectured[i] /= static_cast<double>(out.used);
    }
  }
  return out;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
  auto list = [&](const auto& v) {
    for (std::size_t k = 0; k < v.size(); ++k) out << (k ? ";" : "") << v[k];
  };
  out << "period,hour,key,demand,storage,prices,purchases,delivered,generation,aggregator_costs,generator_costs,"
         "max_constraint,safeguard\n";
  out << std::setprecision(17);
  for (const auto& p : trace.periods) {
    out << p.period << ',' << p.hour << ',' << p.key << ',';
    list(p.demand);
    out << ',';
    list(p.storage);
    out << ',';
    list(p.prices);
    out << ',';
    list(p.purchases);
    out << ',';
    list(p.delivered);
    out << ',';
    list(p.generation);
    out << ',';
    list(p.aggregator_costs);
    out << ',';
    list(p.generator_costs);
    out << ',' << *std::max_element(p.constraint_values.begin(), p.constraint_values.end()) << ','
        << (p.safeguard ? 1 : 0) << '\n';
  }
}

std::vector<RoundDiagnostics> train_online(Coordinator& coordinator, std::size_t periods, std::uint64_t seed,
                                           std::size_t resolve_every) {
  const DsmSystem& system = coordinator.system();
  if (resolve_every == 0) throw DomainError("resolve interval must be positive");
  Environment env(system, coordinator.keys(), seed);
  std::vector<RoundDiagnostics> out;
  out.reserve(periods);
  for (std::size_t t = 0; t < periods; ++t) {
    if (t % resolve_every == 0) coordinator.solve_entities();
    const std::size_t key = env.key();
    const auto agg_states = env.aggregator_states();
    const auto gen_states = env.generator_states();
    std::vector<double> requests, generation;
    for (std::size_t i = 0; i < agg_states.size(); ++i) {
      requests.push_back(system.aggregators[i].mdp().amount(coordinator.aggregator_choice(i, agg_states[i], key)));
    }
    for (std::size_t g = 0; g < gen_states.size(); ++g) {
      generation.push_back(system.generators[g].mdp().amount(coordinator.generator_choice(g, gen_states[g], key)));
    }
    out.push_back(coordinator.round(key, requests, generation));
    env.advance(requests, generation);
  }
  return out;
}

}  // namespace fdsm
