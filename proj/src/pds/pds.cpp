#include "fdsm/pds/pds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {

void check_prices(const AggregatorModel& model, const std::vector<double>& prices) {
  if (prices.size() != model.mdp().price_class_count()) {
    throw ModelError("expected " + std::to_string(model.mdp().price_class_count()) + " class prices, got " +
                     std::to_string(prices.size()));
  }
}

struct Greedy {
  std::size_t choice = 0;
  double value = std::numeric_limits<double>::infinity();
};

Greedy greedy(const AggregatorModel& model, std::size_t state, double price, const PdsValueTable& table,
              double discount) {
  const EntityMdp& mdp = model.mdp();
  const AggregatorState s = model.state(state);
  Greedy best;
  for (std::size_t c = mdp.choice_begin(state); c < mdp.choice_end(state); ++c) {
    const double a = mdp.amount(c);
    const double q = (1.0 - discount) * (mdp.cost(c) + price * a) + discount * table.u[pds_index(model, s, a)];
    if (q < best.value) best = {c, q};
  }
  return best;
}

}  // namespace

std::size_t pds_index(const AggregatorModel& model, const AggregatorState& state, double action) {
  const AggregatorState after{state.hour, state.demand_level,
                              model.snap_storage(model.storage_mw(state) + action - model.demand_mw(state))};
  return model.index(after);
}

LearningRate harmonic_rate() {
  return [](std::size_t visits) { return 1.0 / (1.0 + static_cast<double>(visits)); };
}

LearningRate polynomial_rate(double exponent) {
  if (!(exponent > 0.5 && exponent <= 1.0)) throw DomainError("learning-rate exponent must be in (0.5, 1]");
  return [exponent](std::size_t visits) { return std::pow(1.0 + static_cast<double>(visits), -exponent); };
}

double blend(double current, double sample, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("learning rate must be in (0, 1], got " + std::to_string(alpha));
  return (1.0 - alpha) * current + alpha * sample;
}

PdsStep pds_step(const AggregatorModel& model, std::size_t state, double price, PdsValueTable& table,
                 std::optional<std::size_t> previous_pds, double alpha, double discount) {
  check_discount(discount);
  const Greedy g = greedy(model, state, price, table, discount);
  PdsStep out;
  out.choice = g.choice;
  out.value = g.value;
  out.pds = pds_index(model, model.state(state), model.mdp().amount(g.choice));
  if (previous_pds) {
    double& u = table.u.at(*previous_pds);
    u = blend(u, g.value, alpha);
    ++table.visits[*previous_pds];
    out.updated_u = u;
  }
  return out;
}

ValueTable values_from_pds(const AggregatorModel& model, const PdsValueTable& table,
                           const std::vector<double>& prices, double discount) {
  check_prices(model, prices);
  const EntityMdp& mdp = model.mdp();
  ValueTable v;
  v.values.resize(mdp.state_count());
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    v.values[s] = greedy(model, s, prices[mdp.price_class(s)], table, discount).value;
  }
  return v;
}

void pds_expected_sweep(const AggregatorModel& model, PdsValueTable& table, const std::vector<double>& prices,
                        double discount) {
  const ValueTable v = values_from_pds(model, table, prices, discount);
  const DemandProfile& demand = model.spec().demand;
  for (std::size_t p = 0; p < table.u.size(); ++p) {
    const AggregatorState s = model.state(p);
    const std::vector<double> next = demand.next_distribution(s.hour, s.demand_level);
    const std::size_t hour = (s.hour + 1) % model.clock_count();
    double u = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
      if (next[k] > 0.0) u += next[k] * v.values[model.index({hour, k, s.storage_level})];
    }
    table.u[p] = u;
  }
}

PdsRunResult pds_run(const AggregatorModel& model, const std::vector<double>& prices, const PdsOptions& options) {
  check_discount(options.discount);
  check_prices(model, prices);
  const EntityMdp& mdp = model.mdp();
  if (options.initial_state >= mdp.state_count() || options.probe_state >= mdp.state_count()) {
    throw DomainError("initial or probe state out of range");
  }
  const PriceSchedule schedule = [&] {
    std::vector<std::vector<PriceAtom>> atoms;
    for (double y : prices) atoms.push_back({{y, 1.0}});
    return PriceSchedule(std::move(atoms));
  }();

  PdsRunResult result;
  result.table = PdsValueTable(mdp.state_count());
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t state = options.initial_state;
  std::optional<std::size_t> previous;
  double epsilon = options.epsilon;

  auto record = [&](std::size_t step) {
    const ValueTable v = values_from_pds(model, result.table, prices, options.discount);
    result.curve.push_back({step, bellman_residual(mdp, v, schedule, options.discount), v.values[options.probe_state]});
  };

  for (std::size_t k = 0; k < options.steps; ++k) {
    if (options.record_every > 0 && k % options.record_every == 0) record(k);
    const double alpha = previous ? options.rate(result.table.visits[*previous]) : 1.0;
    const PdsStep step = pds_step(model, state, prices[mdp.price_class(state)], result.table, previous, alpha,
                                  options.discount);
    std::size_t choice = step.choice;
    if (unit(rng) < epsilon) {
      const std::size_t n = mdp.choice_end(state) - mdp.choice_begin(state);
      choice = mdp.choice_begin(state) + std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n)));
    }
    epsilon *= options.epsilon_decay;

    const AggregatorState s = model.state(state);
    const double amount = mdp.amount(choice);
    previous = pds_index(model, s, amount);
    const std::vector<double> next = model.spec().demand.next_distribution(s.hour, s.demand_level);
    double draw = unit(rng);
    std::size_t level = next.size() - 1;
    for (std::size_t j = 0; j < next.size(); ++j) {
      if (draw < next[j]) {
        level = j;
        break;
      }
      draw -= next[j];
    }
    state = model.index(model.storage_transition(s, amount, level));
  }
  if (options.record_every > 0) record(options.steps);
  result.value = values_from_pds(model, result.table, prices, options.discount);
  return result;
}

void write_learning_curve(std::ostream& out, const std::vector<LearningPoint>& curve) {
  out << "step,residual,probe_value\n";
  out.precision(17);
  for (const auto& p : curve) out << p.step << ',' << p.residual << ',' << p.probe_value << '\n';
}

}  // namespace fdsm
