#include "fdsm/baselines/baselines.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {

constexpr std::array<std::pair<StrategyKind, std::string_view>, 5> kNames{{
    {StrategyKind::proposed, "proposed"},
    {StrategyKind::centralized, "centralized"},
    {StrategyKind::myopic, "myopic"},
    {StrategyKind::lyapunov, "lyapunov"},
    {StrategyKind::mumdp, "mumdp"},
}};

template <class Extra>
std::size_t argmin_action(const AggregatorModel& model, std::size_t state, double price, Extra extra) {
  const EntityMdp& mdp = model.mdp();
  std::size_t best = mdp.choice_begin(state);
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = mdp.choice_begin(state); c < mdp.choice_end(state); ++c) {
    const double cost = mdp.cost(c) + price * mdp.amount(c) + extra(mdp.amount(c));
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<StrategyKind>& all_strategies() {
  static const std::vector<StrategyKind> all{StrategyKind::proposed, StrategyKind::centralized, StrategyKind::myopic,
                                             StrategyKind::lyapunov, StrategyKind::mumdp};
  return all;
}

std::size_t myopic_decide(const AggregatorModel& model, std::size_t state, double price) {
  return argmin_action(model, state, price, [](double) { return 0.0; });
}

double lyapunov_drift(double storage, double action, double demand, DriftForm form) {
  const double after = storage + action - (form == DriftForm::with_demand ? demand : 0.0);
  return after * after - storage * storage;
}

std::size_t lyapunov_decide(const AggregatorModel& model, std::size_t state, double price, DriftForm form) {
  const AggregatorState s = model.state(state);
  const double e = model.storage_mw(s);
  const double d = model.demand_mw(s);
  return argmin_action(model, state, price, [&](double a) { return lyapunov_drift(e, a, d, form); });
}

CoordinatorOptions mumdp_options(CoordinatorOptions options) {
  options.single_multiplier = true;
  return options;
}

EntityMdp line_process_mdp(std::size_t clock_count, std::size_t line_count) {
  if (clock_count == 0 || line_count == 0) throw ModelError("line process needs clocks and outcomes");
  MdpBuilder builder(clock_count, 1, {0.0}, "hour,derated_line");
  const double p = 1.0 / static_cast<double>(line_count);
  for (std::size_t h = 0; h < clock_count; ++h) {
    const std::size_t next = (h + 1) % clock_count;
    for (std::size_t l = 0; l < line_count; ++l) {
      builder.add_state(h, 0, std::to_string(h) + "," + std::to_string(l + 1));
      std::vector<Transition> successors;
      for (std::size_t l2 = 0; l2 < line_count; ++l2) {
        successors.push_back({static_cast<std::uint32_t>(next * line_count + l2), p});
      }
      builder.add_choice(0, 0.0, std::move(successors));
    }
  }
  return std::move(builder).build();
}

CentralizedPlanner::CentralizedPlanner(const DsmSystem& system) : system_(&system) {
  system.validate();
  line_outcomes_ = system.degrade_lines ? system.constraints.line_count : 1;
  line_mdp_ = line_process_mdp(system.clock_count(), line_outcomes_);
  for (const auto& g : system.generators) components_.push_back(&g.mdp());
  for (const auto& a : system.aggregators) components_.push_back(&a.mdp());
  components_.push_back(&line_mdp_);
}

std::size_t CentralizedPlanner::state_count() const { return joint_state_count(components_); }

std::size_t CentralizedPlanner::line_state(std::size_t hour, std::size_t line) const {
  return hour * line_outcomes_ + (line_outcomes_ > 1 ? line : 0);
}

void CentralizedPlanner::solve(const SolveOptions& options, std::size_t state_limit) {
  const std::size_t gens = system_->generators.size();
  const std::size_t aggs = system_->aggregators.size();
  std::vector<Eigen::VectorXd> offsets;
  for (std::size_t l = 0; l < line_outcomes_; ++l) {
    const GridModel grid =
        system_->degrade_lines ? with_degraded_line(system_->grid, l, system_->degrade_factor) : system_->grid;
    offsets.push_back(system_->constraints.offset(grid.current_capacities()));
  }
  const ConstraintSet& cs = system_->constraints;
  JointProblem problem;
  problem.components = components_;
  problem.state_limit = state_limit;
  problem.coupling_cost = [&, gens, aggs](std::span<const std::size_t> states, std::span<const std::size_t> choices) {
    Eigen::VectorXd f = offsets[line_outcomes_ > 1 ? states[gens + aggs] % line_outcomes_ : 0];
    for (std::size_t g = 0; g < gens; ++g) {
      const double x = components_[g]->amount(choices[g]);
      if (x != 0.0) f += x * cs.coeff_iso.col(static_cast<Eigen::Index>(g));
    }
    for (std::size_t i = 0; i < aggs; ++i) {
      const double x = components_[gens + i]->amount(choices[gens + i]);
      if (x != 0.0) f += x * cs.coeff_agg.col(static_cast<Eigen::Index>(i));
    }
    return f.maxCoeff() <= 1e-9 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  solution_ = centralized_solve(problem, options);
}

std::vector<std::size_t> CentralizedPlanner::decide(const std::vector<std::size_t>& generator_states,
                                                    const std::vector<std::size_t>& aggregator_states,
                                                    std::size_t line_state) const {
  if (!solution_) throw ModelError("centralized planner has not been solved");
  std::vector<std::size_t> states(generator_states);
  states.insert(states.end(), aggregator_states.begin(), aggregator_states.end());
  states.push_back(line_state);
  return solution_->choices(solution_->index.encode(states));
}

}  // namespace fdsm
