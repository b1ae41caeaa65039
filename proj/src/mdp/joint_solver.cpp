#include "fdsm/mdp/joint_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fdsm/errors.hpp"

namespace fdsm {

namespace {

std::size_t checked_clock_count(const std::vector<const EntityMdp*>& components) {
  if (components.empty()) throw ModelError("joint problem has no components");
  const std::size_t h = components.front()->clock_count();
  for (const auto* c : components) {
    if (c->clock_count() != h) throw ModelError("joint components must share the same clock");
  }
  return h;
}

}  // namespace

std::size_t joint_state_count(const std::vector<const EntityMdp*>& components) {
  const std::size_t hours = checked_clock_count(components);
  std::size_t total = 0;
  for (std::size_t h = 0; h < hours; ++h) {
    double product = 1.0;
    for (const auto* c : components) product *= static_cast<double>(c->states_at_clock(h).size());
    if (product > 1e15) return std::numeric_limits<std::size_t>::max();
    total += static_cast<std::size_t>(product);
  }
  return total;
}

JointIndex::JointIndex(std::vector<const EntityMdp*> components) : components_(std::move(components)) {
  clock_count_ = checked_clock_count(components_);
  offsets_.assign(clock_count_ + 1, 0);
  for (std::size_t h = 0; h < clock_count_; ++h) {
    std::size_t product = 1;
    for (const auto* c : components_) product *= c->states_at_clock(h).size();
    offsets_[h + 1] = offsets_[h] + product;
  }
}

std::size_t JointIndex::encode(std::span<const std::size_t> states) const {
  if (states.size() != components_.size()) throw ModelError("joint state arity mismatch");
  const std::size_t h = components_.front()->clock(states.front());
  std::size_t idx = 0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    if (components_[c]->clock(states[c]) != h) throw ModelError("joint state mixes clocks");
    idx = idx * components_[c]->states_at_clock(h).size() + components_[c]->position_in_clock(states[c]);
  }
  return offsets_[h] + idx;
}

std::size_t JointIndex::clock_of(std::size_t joint) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), joint);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

std::vector<std::size_t> JointIndex::decode(std::size_t joint) const {
  const std::size_t h = clock_of(joint);
  std::size_t rest = joint - offsets_[h];
  std::vector<std::size_t> states(components_.size());
  for (std::size_t c = components_.size(); c-- > 0;) {
    const auto& at = components_[c]->states_at_clock(h);
    states[c] = at[rest % at.size()];
    rest /= at.size();
  }
  return states;
}

std::vector<std::size_t> JointSolution::choices(std::size_t joint) const {
  const std::size_t k = index.component_count();
  return {policy.begin() + static_cast<std::ptrdiff_t>(joint * k),
          policy.begin() + static_cast<std::ptrdiff_t>((joint + 1) * k)};
}

namespace {

struct ClockLayout {
  // Per component: state-action pairs of states at this clock, in state order.
  std::vector<std::vector<std::size_t>> sa_choice;       // local sa -> global choice
  std::vector<std::vector<std::size_t>> state_sa_begin;  // position in clock -> first local sa
  std::vector<std::size_t> sa_stride;                    // stride of component c in the flat table
  std::size_t table_size = 1;
};

struct Entry {
  std::size_t flat;
  double immediate;
};

}  // namespace

JointSolution centralized_solve(const JointProblem& problem, const SolveOptions& options) {
  check_discount(options.discount);
  const auto& comps = problem.components;
  const std::size_t count = joint_state_count(comps);
  if (count > problem.state_limit) {
    throw IntractableError("centralized problem has " + std::to_string(count) + " joint states, limit is " +
                               std::to_string(problem.state_limit),
                           count);
  }
  JointSolution sol{JointIndex(comps), {}, {}, 0.0, 0};
  const JointIndex& index = sol.index;
  const std::size_t k = comps.size();
  const std::size_t hours = index.clock_count();

  std::vector<ClockLayout> layout(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    ClockLayout& lay = layout[h];
    lay.sa_choice.resize(k);
    lay.state_sa_begin.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t s : comps[c]->states_at_clock(h)) {
        lay.state_sa_begin[c].push_back(lay.sa_choice[c].size());
        for (std::size_t ch = comps[c]->choice_begin(s); ch < comps[c]->choice_end(s); ++ch) {
          lay.sa_choice[c].push_back(ch);
        }
      }
      lay.state_sa_begin[c].push_back(lay.sa_choice[c].size());
    }
    lay.sa_stride.assign(k, 1);
    double size = 1.0;
    for (std::size_t c = k; c-- > 0;) {
      lay.sa_stride[c] = static_cast<std::size_t>(size);
      size *= static_cast<double>(lay.sa_choice[c].size());
    }
    if (size > static_cast<double>(problem.table_limit)) {
      throw IntractableError("centralized problem needs " + std::to_string(static_cast<std::size_t>(size)) +
                                 " joint state-action pairs at one clock",
                             count);
    }
    lay.table_size = static_cast<std::size_t>(size);
  }

  // Admissible joint choices and their undiscounted immediate cost, per joint state.
  std::vector<std::size_t> entry_offset(index.size() + 1, 0);
  std::vector<Entry> entries;
  {
    std::vector<std::size_t> choice(k);
    std::vector<std::size_t> cursor(k);
    for (std::size_t j = 0; j < index.size(); ++j) {
      const auto states = index.decode(j);
      const std::size_t h = index.clock_of(j);
      const ClockLayout& lay = layout[h];
      std::vector<std::size_t> first(k), last(k);
      for (std::size_t c = 0; c < k; ++c) {
        first[c] = comps[c]->choice_begin(states[c]);
        last[c] = comps[c]->choice_end(states[c]);
        cursor[c] = first[c];
      }
      for (;;) {
        double immediate = 0.0;
        std::size_t flat = 0;
        for (std::size_t c = 0; c < k; ++c) {
          choice[c] = cursor[c];
          immediate += comps[c]->cost(cursor[c]);
          const std::size_t pos = comps[c]->position_in_clock(states[c]);
          flat += (lay.state_sa_begin[c][pos] + (cursor[c] - first[c])) * lay.sa_stride[c];
        }
        if (problem.coupling_cost) immediate += problem.coupling_cost(states, choice);
        if (std::isfinite(immediate)) entries.push_back({flat, immediate});
        std::size_t c = k;
        while (c-- > 0) {
          if (++cursor[c] < last[c]) break;
          cursor[c] = first[c];
        }
        if (c == static_cast<std::size_t>(-1)) break;
      }
      if (entries.size() == entry_offset[j]) {
        throw ModelError("joint state " + std::to_string(j) + " has no admissible joint action");
      }
      entry_offset[j + 1] = entries.size();
    }
  }

  // Expected next-clock value for every joint state-action pair of clock h.
  std::vector<double> table, scratch;
  auto expectation = [&](std::size_t h, const std::vector<double>& value) {
    const std::size_t next = (h + 1) % hours;
    const ClockLayout& lay = layout[h];
    std::vector<std::size_t> dims(k);
    for (std::size_t c = 0; c < k; ++c) dims[c] = comps[c]->states_at_clock(next).size();
    table.assign(value.begin() + static_cast<std::ptrdiff_t>(index.clock_begin(next)),
                 value.begin() + static_cast<std::ptrdiff_t>(index.clock_end(next)));
    std::size_t inner = 1;
    for (std::size_t c = k; c-- > 0;) {
      std::size_t outer = 1;
      for (std::size_t q = 0; q < c; ++q) outer *= dims[q];
      const std::size_t n_next = dims[c];
      const std::size_t m = lay.sa_choice[c].size();
      scratch.assign(outer * m * inner, 0.0);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t sa = 0; sa < m; ++sa) {
          double* dst = scratch.data() + (o * m + sa) * inner;
          for (const auto& t : comps[c]->transitions(lay.sa_choice[c][sa])) {
            const double* src = table.data() + (o * n_next + comps[c]->position_in_clock(t.next)) * inner;
            for (std::size_t i = 0; i < inner; ++i) dst[i] += t.probability * src[i];
          }
        }
      }
      table.swap(scratch);
      inner *= m;
    }
  };

  const double delta = options.discount;
  sol.value.assign(index.size(), 0.0);
  std::vector<std::size_t> best_entry(index.size(), 0);
  auto update_clock = [&](std::size_t h, const std::vector<double>& source, std::vector<double>& target,
                          bool record) {
    expectation(h, source);
    double change = 0.0;
    for (std::size_t j = index.clock_begin(h); j < index.clock_end(h); ++j) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = entry_offset[j];
      for (std::size_t e = entry_offset[j]; e < entry_offset[j + 1]; ++e) {
        const double q = (1.0 - delta) * entries[e].immediate + delta * table[entries[e].flat];
        if (q < best) {
          best = q;
          arg = e;
        }
      }
      change = std::max(change, std::abs(best - source[j]));
      target[j] = best;
      if (record) best_entry[j] = arg;
    }
    return change;
  };

  std::vector<double> snapshot;
  for (;;) {
    while (sol.sweeps < options.max_sweeps) {
      double change = 0.0;
      for (std::size_t h = hours; h-- > 0;) {
        if (hours == 1) {
          snapshot = sol.value;
          change = std::max(change, update_clock(h, snapshot, sol.value, false));
        } else {
          change = std::max(change, update_clock(h, sol.value, sol.value, false));
        }
      }
      ++sol.sweeps;
      if (change <= options.tolerance) break;
    }
    snapshot = sol.value;
    std::vector<double> fresh(index.size(), 0.0);
    double residual = 0.0;
    for (std::size_t h = 0; h < hours; ++h) residual = std::max(residual, update_clock(h, snapshot, fresh, true));
    sol.value.swap(fresh);
    sol.residual = residual;
    if (residual <= options.tolerance) break;
    if (sol.sweeps >= options.max_sweeps) throw NumericalError("centralized value iteration did not converge");
  }

  sol.policy.assign(index.size() * k, 0);
  for (std::size_t j = 0; j < index.size(); ++j) {
    const ClockLayout& lay = layout[index.clock_of(j)];
    std::size_t flat = entries[best_entry[j]].flat;
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t sa = flat / lay.sa_stride[c];
      flat %= lay.sa_stride[c];
      sol.policy[j * k + c] = lay.sa_choice[c][sa];
    }
  }
  return sol;
}

}  // namespace fdsm
