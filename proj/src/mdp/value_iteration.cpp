#include "fdsm/mdp/value_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "fdsm/errors.hpp"

namespace fdsm {

void check_discount(double discount) {
  if (!(discount >= 0.0) || !(discount < 1.0)) {
    throw DomainError("discount must be in [0, 1), got " + std::to_string(discount));
  }
}

PriceSchedule::PriceSchedule(std::vector<std::vector<PriceAtom>> per_class) : atoms_(std::move(per_class)) {
  for (auto& atoms : atoms_) {
    if (atoms.empty()) throw ModelError("price class without atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.weight > 0.0) || !std::isfinite(a.price)) throw ModelError("invalid price atom");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ModelError("price atom weights must sum to one");
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const PriceAtom& a, const PriceAtom& b) { return a.price < b.price; });
  }
}

PriceSchedule PriceSchedule::constant(double price, std::size_t class_count) {
  return PriceSchedule(std::vector<std::vector<PriceAtom>>(class_count, {PriceAtom{price, 1.0}}));
}

double PriceSchedule::mean(std::size_t price_class) const {
  double m = 0.0;
  for (const auto& a : atoms_[price_class]) m += a.weight * a.price;
  return m;
}

std::vector<PriceAtom> PriceSchedule::merge(std::vector<PriceAtom> atoms, double resolution) {
  std::map<long long, double> buckets;
  for (const auto& a : atoms) {
    const long long key = std::llround(a.price / resolution);
    buckets[key] += a.weight;
  }
  std::vector<PriceAtom> out;
  out.reserve(buckets.size());
  double total = 0.0;
  for (const auto& [key, w] : buckets) total += w;
  for (const auto& [key, w] : buckets) out.push_back({static_cast<double>(key) * resolution, w / total});
  return out;
}

double continuation(const EntityMdp& mdp, const ValueTable& value, std::size_t choice) {
  double w = 0.0;
  for (const auto& t : mdp.transitions(choice)) w += t.probability * value.values[t.next];
  return w;
}

double q_value(const EntityMdp& mdp, const ValueTable& value, std::size_t choice, double price,
               double discount) {
  return (1.0 - discount) * (mdp.cost(choice) + price * mdp.amount(choice)) +
         discount * continuation(mdp, value, choice);
}

std::size_t greedy_choice(const EntityMdp& mdp, const ValueTable& value, std::size_t state, double price,
                          double discount) {
  std::size_t best = mdp.choice_begin(state);
  double best_q = std::numeric_limits<double>::infinity();
  for (std::size_t c = mdp.choice_begin(state); c < mdp.choice_end(state); ++c) {
    const double q = q_value(mdp, value, c, price, discount);
    if (q < best_q) {
      best_q = q;
      best = c;
    }
  }
  return best;
}

PolicyTable greedy_policy(const EntityMdp& mdp, const ValueTable& value, double price, double discount) {
  PolicyTable policy;
  policy.actions.resize(mdp.state_count());
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    policy.actions[s] = mdp.local_action(s, greedy_choice(mdp, value, s, price, discount));
  }
  return policy;
}

namespace {

struct Line {
  double slope;
  double intercept;
};

// Lower envelope of lines queried at ascending prices; lines arrive with slopes descending.
class Envelope {
 public:
  void reset() { hull_.clear(); }

  void add(const Line& line) {
    if (!hull_.empty() && hull_.back().slope == line.slope) {
      if (line.intercept >= hull_.back().intercept) return;
      hull_.pop_back();
    }
    while (hull_.size() >= 2 && redundant(hull_[hull_.size() - 2], hull_.back(), line)) hull_.pop_back();
    hull_.push_back(line);
  }

  double weighted_min(const std::vector<PriceAtom>& atoms) const {
    std::size_t ptr = 0;
    double total = 0.0;
    for (const auto& atom : atoms) {
      while (ptr + 1 < hull_.size() && eval(hull_[ptr + 1], atom.price) <= eval(hull_[ptr], atom.price)) ++ptr;
      total += atom.weight * eval(hull_[ptr], atom.price);
    }
    return total;
  }

 private:
  static double eval(const Line& l, double x) { return l.intercept + l.slope * x; }
  // b is never strictly below both a and c (slopes a > b > c).
  static bool redundant(const Line& a, const Line& b, const Line& c) {
    return (c.intercept - a.intercept) * (a.slope - b.slope) <= (b.intercept - a.intercept) * (a.slope - c.slope);
  }
  std::vector<Line> hull_;
};

class Backup {
 public:
  Backup(const EntityMdp& mdp, const PriceSchedule& prices, double discount)
      : mdp_(mdp), prices_(prices), discount_(discount) {
    multi_ = false;
    for (std::size_t k = 0; k < prices.class_count(); ++k) multi_ = multi_ || prices.atoms(k).size() > 1;
    if (multi_) {
      order_.resize(mdp.choice_count());
      for (std::size_t s = 0; s < mdp.state_count(); ++s) {
        const auto begin = order_.begin() + static_cast<std::ptrdiff_t>(mdp.choice_begin(s));
        const auto end = order_.begin() + static_cast<std::ptrdiff_t>(mdp.choice_end(s));
        std::iota(begin, end, static_cast<std::uint32_t>(mdp.choice_begin(s)));
        std::stable_sort(begin, end, [&](std::uint32_t a, std::uint32_t b) { return mdp.amount(a) > mdp.amount(b); });
      }
    }
  }

  double operator()(std::size_t s, const ValueTable& v) {
    const auto& atoms = prices_.atoms(mdp_.price_class(s));
    if (atoms.size() == 1) {
      const double y = atoms.front().price;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = mdp_.choice_begin(s); c < mdp_.choice_end(s); ++c) {
        best = std::min(best, q_value(mdp_, v, c, y, discount_));
      }
      return best;
    }
    envelope_.reset();
    for (std::size_t k = mdp_.choice_begin(s); k < mdp_.choice_end(s); ++k) {
      const std::size_t c = order_[k];
      envelope_.add({(1.0 - discount_) * mdp_.amount(c),
                     (1.0 - discount_) * mdp_.cost(c) + discount_ * continuation(mdp_, v, c)});
    }
    return envelope_.weighted_min(atoms);
  }

 private:
  const EntityMdp& mdp_;
  const PriceSchedule& prices_;
  double discount_;
  bool multi_ = false;
  std::vector<std::uint32_t> order_;
  Envelope envelope_;
};

void check_schedule(const EntityMdp& mdp, const PriceSchedule& prices) {
  if (prices.class_count() != mdp.price_class_count()) {
    throw ModelError("price schedule has " + std::to_string(prices.class_count()) + " classes, MDP expects " +
                     std::to_string(mdp.price_class_count()));
  }
}

}  // namespace

double bellman_residual(const EntityMdp& mdp, const ValueTable& value, const PriceSchedule& prices,
                        double discount) {
  check_schedule(mdp, prices);
  Backup backup(mdp, prices, discount);
  double r = 0.0;
  for (std::size_t s = 0; s < mdp.state_count(); ++s) r = std::max(r, std::abs(backup(s, value) - value.values[s]));
  return r;
}

SolveResult value_iterate(const EntityMdp& mdp, const PriceSchedule& prices, const SolveOptions& options,
                          const ValueTable* warm_start) {
  check_discount(options.discount);
  if (!(options.tolerance > 0.0)) throw DomainError("tolerance must be positive");
  check_schedule(mdp, prices);
  const std::size_t n = mdp.state_count();
  SolveResult result;
  ValueTable v;
  if (warm_start && warm_start->values.size() == n) {
    v = *warm_start;
  } else {
    v.values.assign(n, 0.0);
  }
  Backup backup(mdp, prices, options.discount);

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t h = mdp.clock_count(); h-- > 0;) {
    const auto& states = mdp.states_at_clock(h);
    order.insert(order.end(), states.begin(), states.end());
  }

  ValueTable next;
  next.values.assign(n, 0.0);
  for (;;) {
    while (result.sweeps < options.max_sweeps) {
      double change = 0.0;
      if (options.order == SweepOrder::gauss_seidel) {
        for (std::size_t s : order) {
          const double updated = backup(s, v);
          change = std::max(change, std::abs(updated - v.values[s]));
          v.values[s] = updated;
        }
      } else {
        for (std::size_t s = 0; s < n; ++s) {
          next.values[s] = backup(s, v);
          change = std::max(change, std::abs(next.values[s] - v.values[s]));
        }
        std::swap(v.values, next.values);
      }
      ++result.sweeps;
      result.residual_history.push_back(change);
      if (change <= options.tolerance) break;
    }
    // Final synchronous application so the reported residual is the Bellman residual of v.
    double residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      next.values[s] = backup(s, v);
      residual = std::max(residual, std::abs(next.values[s] - v.values[s]));
    }
    if (residual <= options.tolerance || result.sweeps >= options.max_sweeps) {
      if (residual > options.tolerance) {
        throw NumericalError("value iteration stopped after " + std::to_string(result.sweeps) +
                             " sweeps with residual " + std::to_string(residual));
      }
      result.residual = residual;
      break;
    }
    ++result.sweeps;
    result.residual_history.push_back(residual);
    std::swap(v.values, next.values);
  }

  result.policy.actions.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double y = prices.atoms(mdp.price_class(s)).size() == 1 ? prices.atoms(mdp.price_class(s)).front().price
                                                                  : prices.mean(mdp.price_class(s));
    result.policy.actions[s] = mdp.local_action(s, greedy_choice(mdp, v, s, y, options.discount));
  }
  result.value = std::move(next);
  return result;
}

SolveResult value_iterate(const EntityMdp& mdp, double price, double discount, double tolerance) {
  SolveOptions options;
  options.discount = discount;
  options.tolerance = tolerance;
  return value_iterate(mdp, PriceSchedule::constant(price, mdp.price_class_count()), options);
}

SolveResult iso_generator_solve(const EntityMdp& generator, double price, double discount, double tolerance) {
  return value_iterate(generator, price, discount, tolerance);
}

SolveResult iso_generator_solve(const EntityMdp& generator, const PriceSchedule& prices,
                                const SolveOptions& options, const ValueTable* warm_start) {
  return value_iterate(generator, prices, options, warm_start);
}

std::string table_csv(const EntityMdp& mdp, const ValueTable& value, const PolicyTable& policy) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << mdp.label_header() << ",value,action,amount\n";
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    const std::size_t c = mdp.choice_begin(s) + policy.actions[s];
    out << mdp.label(s) << ',' << value.values[s] << ',' << policy.actions[s] << ',' << mdp.amount(c) << '\n';
  }
  return out.str();
}

}  // namespace fdsm
