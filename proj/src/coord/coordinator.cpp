#include "fdsm/coord/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fdsm/errors.hpp"

namespace fdsm {

double price_from_multiplier(const Eigen::VectorXd& lambda, const ConstraintSet& constraints, EntityRef entity) {
  const Eigen::MatrixXd& block =
      entity.kind == EntityRef::Kind::generator ? constraints.coeff_iso : constraints.coeff_agg;
  if (lambda.size() != block.rows()) throw ModelError("multiplier has the wrong number of rows");
  if (entity.index >= static_cast<std::size_t>(block.cols())) throw ModelError("entity index out of range");
  return lambda.dot(block.col(static_cast<Eigen::Index>(entity.index)));
}

Eigen::VectorXd update_multipliers(const Eigen::VectorXd& lambda, const Eigen::VectorXd& f_hat, double step) {
  if (!(step > 0.0)) throw DomainError("multiplier step must be positive");
  if (lambda.size() != f_hat.size()) throw ModelError("constraint vector has the wrong number of rows");
  return (lambda + step * f_hat).cwiseMax(0.0);
}

const Eigen::VectorXd& MultiplierTable::at(std::size_t key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? zero_ : it->second;
}

void MultiplierTable::set(std::size_t key, Eigen::VectorXd lambda) {
  if (lambda.size() != zero_.size()) throw ModelError("multiplier has the wrong number of rows");
  if ((lambda.array() < 0.0).any()) throw DomainError("multipliers must be non-negative");
  entries_[key] = std::move(lambda);
}

PriceEntry prices_from_multiplier(const Eigen::VectorXd& lambda, const ConstraintSet& constraints) {
  return {constraints.coeff_agg.transpose() * lambda, constraints.coeff_iso.transpose() * lambda};
}

PriceTable::PriceTable(const ConstraintSet* constraints) {
  if (constraints) {
    zero_.aggregator = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(constraints->aggregator_count()));
    zero_.generator = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(constraints->generator_count()));
  }
}

const PriceEntry& PriceTable::at(std::size_t key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? zero_ : it->second;
}

PriceTable rebuild_prices(const MultiplierTable& multipliers, const ConstraintSet& constraints) {
  PriceTable out(&constraints);
  for (const auto& [key, lambda] : multipliers.entries()) out.set(key, prices_from_multiplier(lambda, constraints));
  return out;
}

void PurchaseAverager::add(const std::vector<double>& requests) {
  if (requests.size() != sums_.size()) throw ProtocolError("request vector has the wrong number of aggregators");
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += requests[i];
  ++count_;
}

std::vector<double> PurchaseAverager::average() const {
  std::vector<double> out(sums_.size(), 0.0);
  if (count_ == 0) return out;
  for (std::size_t i = 0; i < sums_.size(); ++i) out[i] = sums_[i] / static_cast<double>(count_);
  return out;
}

bool has_converged(const std::vector<ValueTable>& before, const std::vector<ValueTable>& after,
                   const std::vector<double>& tolerance) {
  if (before.size() != after.size() || before.size() != tolerance.size()) {
    throw ModelError("convergence check over different entity sets");
  }
  for (std::size_t e = 0; e < before.size(); ++e) {
    if (before[e].values.size() != after[e].values.size()) {
      throw ModelError("value tables of entity " + std::to_string(e) + " are over different grids");
    }
    for (std::size_t s = 0; s < before[e].values.size(); ++s) {
      if (!(std::abs(before[e].values[s] - after[e].values[s]) <= tolerance[e])) return false;
    }
  }
  return true;
}

double quantize_price(double price, double resolution) {
  if (!(resolution > 0.0)) return price;
  return static_cast<double>(std::llround(price / resolution)) * resolution;
}

std::vector<double> stationary_marginals(const EntityMdp& mdp, const std::vector<std::vector<double>>& class_weights,
                                         const std::vector<std::vector<std::size_t>>& state_choices) {
  const std::size_t n = mdp.state_count();
  const std::size_t hours = mdp.clock_count();
  // Mixed successor distribution per state.
  std::vector<std::vector<Transition>> mixed(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& weights = class_weights[mdp.price_class(s)];
    std::vector<Transition> acc;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      for (const auto& t : mdp.transitions(state_choices[s][j])) acc.push_back({t.next, weights[j] * t.probability});
    }
    std::sort(acc.begin(), acc.end(), [](const Transition& a, const Transition& b) { return a.next < b.next; });
    for (const auto& t : acc) {
      if (!mixed[s].empty() && mixed[s].back().next == t.next) {
        mixed[s].back().probability += t.probability;
      } else {
        mixed[s].push_back(t);
      }
    }
  }

  std::vector<double> mu(n, 0.0);
  const auto& first = mdp.states_at_clock(0);
  for (std::size_t s : first) mu[s] = 1.0 / static_cast<double>(first.size());
  std::vector<double> scratch(n, 0.0);
  auto propagate_day = [&]() {
    // Leaves the start-of-day marginal in mu and fills every later clock.
    for (std::size_t h = 0; h < hours; ++h) {
      const std::size_t next = (h + 1) % hours;
      for (std::size_t s : mdp.states_at_clock(next)) scratch[s] = 0.0;
      for (std::size_t s : mdp.states_at_clock(h)) {
        for (const auto& t : mixed[s]) scratch[t.next] += mu[s] * t.probability;
      }
      if (next == 0) break;
      for (std::size_t s : mdp.states_at_clock(next)) mu[s] = scratch[s];
    }
  };
  for (int day = 0; day < 20000; ++day) {
    propagate_day();
    double diff = 0.0;
    for (std::size_t s : first) {
      diff += std::abs(scratch[s] - mu[s]);
      mu[s] = 0.5 * (mu[s] + scratch[s]);
    }
    if (diff < 1e-13) break;
  }
  propagate_day();
  return mu;
}

Coordinator::Coordinator(const DsmSystem& system, CoordinatorOptions options)
    : system_(&system),
      options_(options),
      keys_(system),
      multipliers_(system.constraints.rows()),
      prices_(&system.constraints) {
  system.validate();
  check_discount(options_.discount);
  for (std::size_t g = 0; g < system.generators.size(); ++g) {
    mdps_.push_back({&system.generators[g].mdp(), {EntityRef::Kind::generator, g}, {}});
  }
  for (std::size_t i = 0; i < system.aggregators.size(); ++i) {
    mdps_.push_back({&system.aggregators[i].mdp(), {EntityRef::Kind::aggregator, i}, {}});
  }
  for (auto& slot : mdps_) {
    slot.class_keys.resize(slot.mdp->price_class_count());
    for (std::size_t key = 0; key < keys_.size(); ++key) {
      if (slot.ref.kind == EntityRef::Kind::aggregator) {
        slot.class_keys[keys_.aggregator_class(key)].push_back({key, keys_.probability_given_hour(key)});
      } else {
        slot.class_keys[keys_.generator_class(key, slot.ref.index)].push_back(
            {key, keys_.probability_given_generator_class(key, slot.ref.index)});
      }
    }
    for (const auto& ck : slot.class_keys) {
      if (ck.empty()) throw ModelError("an entity price class is never reached by an ISO state");
    }
  }
  offsets_.reserve(keys_.size());
  for (std::size_t key = 0; key < keys_.size(); ++key) offsets_.push_back(system.constraints.offset(keys_.capacities(key)));
}

const Eigen::VectorXd& Coordinator::lambda(std::size_t key) const { return multipliers_.at(multiplier_key(key)); }

const PriceEntry& Coordinator::price_entry(std::size_t key) const { return prices_.at(multiplier_key(key)); }

double Coordinator::aggregator_price(std::size_t aggregator, std::size_t key) const {
  return price_entry(key).aggregator(static_cast<Eigen::Index>(aggregator));
}

double Coordinator::generator_price(std::size_t generator, std::size_t key) const {
  return price_entry(key).generator(static_cast<Eigen::Index>(generator));
}

double Coordinator::entity_price(const Slot& slot, std::size_t key) const {
  const double raw = slot.ref.kind == EntityRef::Kind::aggregator ? aggregator_price(slot.ref.index, key)
                                                                  : generator_price(slot.ref.index, key);
  return quantize_price(raw, options_.price_resolution);
}

void Coordinator::refresh_prices(std::size_t mkey) {
  prices_.set(mkey, prices_from_multiplier(multipliers_.at(mkey), system_->constraints));
}

void Coordinator::set_multipliers(const MultiplierTable& table) {
  if (table.rows() != multipliers_.rows()) throw ModelError("multiplier table has the wrong number of rows");
  multipliers_ = table;
  prices_ = rebuild_prices(multipliers_, system_->constraints);
}

void Coordinator::solve_entities() {
  SolveOptions opts;
  opts.discount = options_.discount;
  opts.tolerance = options_.solve_tolerance;
  const bool warm = !values_.empty();
  std::vector<ValueTable> next(mdps_.size());
  residuals_.assign(mdps_.size(), 0.0);
  for (std::size_t e = 0; e < mdps_.size(); ++e) {
    const Slot& slot = mdps_[e];
    std::vector<std::vector<PriceAtom>> per_class(slot.class_keys.size());
    for (std::size_t c = 0; c < slot.class_keys.size(); ++c) {
      std::vector<PriceAtom> atoms;
      atoms.reserve(slot.class_keys[c].size());
      for (const auto& [key, p] : slot.class_keys[c]) atoms.push_back({entity_price(slot, key), p});
      per_class[c] = PriceSchedule::merge(std::move(atoms), options_.price_resolution);
    }
    const SolveResult r =
        value_iterate(*slot.mdp, PriceSchedule(std::move(per_class)), opts, warm ? &values_[e] : nullptr);
    next[e] = r.value;
    residuals_[e] = r.residual;
  }
  values_ = std::move(next);
}

const ValueTable& Coordinator::aggregator_value(std::size_t aggregator) const {
  if (values_.empty()) throw ProtocolError("entities have not been solved yet");
  return values_.at(system_->generators.size() + aggregator);
}

const ValueTable& Coordinator::generator_value(std::size_t generator) const {
  if (values_.empty()) throw ProtocolError("entities have not been solved yet");
  return values_.at(generator);
}

std::size_t Coordinator::choice_at(std::size_t entity, std::size_t state, std::size_t key) const {
  if (values_.empty()) throw ProtocolError("entities have not been solved yet");
  const Slot& slot = mdps_[entity];
  return greedy_choice(*slot.mdp, values_[entity], state, entity_price(slot, key), options_.discount);
}

std::size_t Coordinator::aggregator_choice(std::size_t aggregator, std::size_t state, std::size_t key) const {
  return choice_at(system_->generators.size() + aggregator, state, key);
}

std::size_t Coordinator::generator_choice(std::size_t generator, std::size_t state, std::size_t key) const {
  return choice_at(generator, state, key);
}

RoundDiagnostics Coordinator::round(std::size_t key, const std::vector<double>& requests,
                                    const std::vector<double>& generation) {
  if (key >= keys_.size()) throw ProtocolError("unknown ISO state " + std::to_string(key));
  const std::size_t agg = system_->aggregators.size();
  if (requests.size() != agg) throw ProtocolError("request vector has the wrong number of aggregators");
  if (generation.size() != system_->generators.size()) throw ProtocolError("generation vector has the wrong size");
  for (std::size_t i = 0; i < agg; ++i) system_->aggregators[i].action_index(requests[i]);

  auto [it, inserted] = averagers_.try_emplace(key, agg);
  it->second.add(requests);
  const std::size_t mkey = multiplier_key(key);
  std::size_t& visits = visits_[mkey];
  const std::size_t k = visits;
  const std::vector<double> mean = it->second.average();

  Eigen::VectorXd gen(static_cast<Eigen::Index>(generation.size()));
  for (std::size_t g = 0; g < generation.size(); ++g) gen(static_cast<Eigen::Index>(g)) = generation[g];
  Eigen::VectorXd purchases(static_cast<Eigen::Index>(agg));
  for (std::size_t i = 0; i < agg; ++i) purchases(static_cast<Eigen::Index>(i)) = mean[i];
  RoundDiagnostics out;
  out.key = key;
  out.visit = k;
  out.f_hat = system_->constraints.coeff_iso * gen + system_->constraints.coeff_agg * purchases + offsets_[key];
  multipliers_.set(mkey, update_multipliers(multipliers_.at(mkey), out.f_hat, options_.step_scale * step_size(k)));
  refresh_prices(mkey);
  ++visits;
  out.lambda = multipliers_.at(mkey);
  out.prices = prices_.at(mkey);
  return out;
}

std::vector<std::vector<double>> Coordinator::expected_amounts() const {
  const std::size_t key_count = keys_.size();
  std::vector<std::vector<double>> out(mdps_.size(), std::vector<double>(key_count, 0.0));
  const double delta = options_.discount;
  for (std::size_t e = 0; e < mdps_.size(); ++e) {
    const Slot& slot = mdps_[e];
    const EntityMdp& mdp = *slot.mdp;
    const ValueTable& v = values_[e];
    std::vector<std::vector<double>> class_prices(slot.class_keys.size());
    std::vector<std::vector<double>> class_weights(slot.class_keys.size());
    for (std::size_t c = 0; c < slot.class_keys.size(); ++c) {
      for (const auto& [key, p] : slot.class_keys[c]) {
        class_prices[c].push_back(entity_price(slot, key));
        class_weights[c].push_back(p);
      }
    }
    std::vector<std::vector<std::size_t>> choices(mdp.state_count());
    std::vector<double> cont;
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
      const std::size_t begin = mdp.choice_begin(s);
      const std::size_t end = mdp.choice_end(s);
      cont.resize(end - begin);
      for (std::size_t c = begin; c < end; ++c) cont[c - begin] = continuation(mdp, v, c);
      const auto& prices = class_prices[mdp.price_class(s)];
      choices[s].resize(prices.size());
      double last_price = 0.0;
      std::size_t last_choice = begin;
      for (std::size_t j = 0; j < prices.size(); ++j) {
        const double y = prices[j];
        if (j > 0 && y == last_price) {
          choices[s][j] = last_choice;
          continue;
        }
        std::size_t best = begin;
        double best_q = std::numeric_limits<double>::infinity();
        for (std::size_t c = begin; c < end; ++c) {
          const double q = (1.0 - delta) * (mdp.cost(c) + y * mdp.amount(c)) + delta * cont[c - begin];
          if (q < best_q) {
            best_q = q;
            best = c;
          }
        }
        choices[s][j] = best;
        last_price = y;
        last_choice = best;
      }
    }
    const std::vector<double> mu = stationary_marginals(mdp, class_weights, choices);
    std::vector<double> class_mass(slot.class_keys.size(), 0.0);
    for (std::size_t s = 0; s < mdp.state_count(); ++s) class_mass[mdp.price_class(s)] += mu[s];
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
      const std::size_t c = mdp.price_class(s);
      if (class_mass[c] <= 0.0) continue;
      const double w = mu[s] / class_mass[c];
      for (std::size_t j = 0; j < slot.class_keys[c].size(); ++j) {
        out[e][slot.class_keys[c][j].first] += w * mdp.amount(choices[s][j]);
      }
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> Coordinator::expected_constraints() const {
  if (values_.empty()) throw ProtocolError("entities have not been solved yet");
  const auto amounts = expected_amounts();
  const std::size_t g_count = system_->generators.size();
  std::vector<Eigen::VectorXd> out;
  out.reserve(keys_.size());
  Eigen::VectorXd gen(static_cast<Eigen::Index>(g_count));
  Eigen::VectorXd agg(static_cast<Eigen::Index>(system_->aggregators.size()));
  for (std::size_t key = 0; key < keys_.size(); ++key) {
    for (std::size_t e = 0; e < mdps_.size(); ++e) {
      if (e < g_count) {
        gen(static_cast<Eigen::Index>(e)) = amounts[e][key];
      } else {
        agg(static_cast<Eigen::Index>(e - g_count)) = amounts[e][key];
      }
    }
    out.push_back(system_->constraints.coeff_iso * gen + system_->constraints.coeff_agg * agg + offsets_[key]);
  }
  return out;
}

const char* Coordinator::diagnostics_header() {
  return "k,key,state,lambda,aggregator_prices,generator_prices,f_hat,entity_residuals";
}

namespace {

void write_list(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out << ';';
    out << v(k);
  }
}

}  // namespace

IterationSummary Coordinator::exact_iteration(std::ostream* diagnostics) {
  const std::vector<ValueTable> before = values_;
  solve_entities();
  IterationSummary summary;
  summary.iteration = iteration_;
  for (double r : residuals_) summary.max_residual = std::max(summary.max_residual, r);
  if (!before.empty()) {
    for (std::size_t e = 0; e < values_.size(); ++e) {
      for (std::size_t s = 0; s < values_[e].values.size(); ++s) {
        summary.max_value_change =
            std::max(summary.max_value_change, std::abs(values_[e].values[s] - before[e].values[s]));
      }
    }
    summary.converged = iteration_ + 1 >= options_.min_iterations &&
                        has_converged(before, values_, std::vector<double>(values_.size(), options_.convergence_tolerance));
  } else {
    summary.max_value_change = std::numeric_limits<double>::infinity();
  }

  last_constraints_ = expected_constraints();
  const std::vector<Eigen::VectorXd>& f = last_constraints_;
  for (const auto& row : f) summary.max_violation = std::max(summary.max_violation, row.maxCoeff());
  const double step = options_.step_scale * step_size(iteration_);
  if (options_.single_multiplier) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(multipliers_.rows()));
    const double per_hour = 1.0 / static_cast<double>(keys_.clock_count());
    for (std::size_t key = 0; key < keys_.size(); ++key) mean += per_hour * keys_.probability_given_hour(key) * f[key];
    multipliers_.set(0, update_multipliers(multipliers_.at(0), mean, step));
    refresh_prices(0);
    visits_[0] = iteration_ + 1;
  } else {
    for (std::size_t key = 0; key < keys_.size(); ++key) {
      multipliers_.set(key, update_multipliers(multipliers_.at(key), f[key], step));
      refresh_prices(key);
      visits_[key] = iteration_ + 1;
    }
  }
  double supply = 0.0;
  const auto supply_row = static_cast<Eigen::Index>(system_->constraints.supply_row());
  for (std::size_t key = 0; key < keys_.size(); ++key) supply += lambda(key)(supply_row);
  summary.mean_supply_multiplier = supply / static_cast<double>(keys_.size());

  if (diagnostics) {
    std::ostream& out = *diagnostics;
    Eigen::VectorXd res(static_cast<Eigen::Index>(residuals_.size()));
    for (std::size_t e = 0; e < residuals_.size(); ++e) res(static_cast<Eigen::Index>(e)) = residuals_[e];
    for (std::size_t key = 0; key < keys_.size(); ++key) {
      out << iteration_ << ',' << key << ',' << keys_.describe(key) << ',';
      write_list(out, lambda(key));
      out << ',';
      write_list(out, price_entry(key).aggregator);
      out << ',';
      write_list(out, price_entry(key).generator);
      out << ',';
      write_list(out, f[key]);
      out << ',';
      write_list(out, res);
      out << '\n';
    }
  }
  ++iteration_;
  return summary;
}

std::vector<IterationSummary> Coordinator::run_exact(std::ostream* diagnostics) {
  std::vector<IterationSummary> history;
  while (iteration_ < options_.max_iterations) {
    history.push_back(exact_iteration(diagnostics));
    if (history.back().converged) break;
  }
  // Final solve so the entity tables correspond to the last multipliers.
  solve_entities();
  return history;
}

}  // namespace fdsm
