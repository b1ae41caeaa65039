#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fdsm {

struct Transition {
  std::uint32_t next = 0;
  double probability = 0.0;
};

// Finite MDP of one entity. States are grouped by clock (hour of day); every
// transition from clock h lands in clock (h + 1) mod clock_count. Actions
// ("choices") are stored per state with the energy amount they trade, their
// price-free stage cost and a sparse successor distribution.
class EntityMdp {
 public:
  std::size_t state_count() const { return state_class_.size(); }
  std::size_t choice_count() const { return choice_amount_.size(); }
  std::size_t clock_count() const { return clock_count_; }
  std::size_t price_class_count() const { return price_class_count_; }

  std::size_t choice_begin(std::size_t s) const { return state_choice_offset_[s]; }
  std::size_t choice_end(std::size_t s) const { return state_choice_offset_[s + 1]; }
  std::size_t price_class(std::size_t s) const { return state_class_[s]; }
  std::size_t clock(std::size_t s) const { return state_clock_[s]; }

  double amount(std::size_t c) const { return choice_amount_[c]; }
  std::size_t amount_index(std::size_t c) const { return choice_amount_index_[c]; }
  double cost(std::size_t c) const { return choice_cost_[c]; }
  std::span<const Transition> transitions(std::size_t c) const {
    return {transitions_.data() + choice_transition_offset_[c],
            choice_transition_offset_[c + 1] - choice_transition_offset_[c]};
  }

  // Position of choice c within its state's action list.
  std::size_t local_action(std::size_t s, std::size_t c) const { return c - choice_begin(s); }

  const std::vector<double>& amount_levels() const { return amount_levels_; }
  const std::vector<std::size_t>& states_at_clock(std::size_t h) const { return clock_states_[h]; }
  // Index of state s inside states_at_clock(clock(s)).
  std::size_t position_in_clock(std::size_t s) const { return state_clock_position_[s]; }

  const std::string& label_header() const { return label_header_; }
  const std::string& label(std::size_t s) const { return labels_[s]; }

 private:
  friend class MdpBuilder;
  std::size_t clock_count_ = 1;
  std::size_t price_class_count_ = 1;
  std::vector<std::size_t> state_class_;
  std::vector<std::size_t> state_clock_;
  std::vector<std::size_t> state_clock_position_;
  std::vector<std::vector<std::size_t>> clock_states_;
  std::vector<std::size_t> state_choice_offset_{0};
  std::vector<double> choice_amount_;
  std::vector<std::size_t> choice_amount_index_;
  std::vector<double> choice_cost_;
  std::vector<std::size_t> choice_transition_offset_{0};
  std::vector<Transition> transitions_;
  std::vector<double> amount_levels_;
  std::string label_header_;
  std::vector<std::string> labels_;
};

class MdpBuilder {
 public:
  MdpBuilder(std::size_t clock_count, std::size_t price_class_count, std::vector<double> amount_levels,
             std::string label_header);

  // States must be added in index order; returns the new state index.
  std::size_t add_state(std::size_t clock, std::size_t price_class, std::string label);
  // Adds a choice to the most recently added state.
  void add_choice(std::size_t amount_index, double cost, std::vector<Transition> successors);

  // Validates stochasticity, clock consistency and non-empty action sets.
  EntityMdp build() &&;

 private:
  EntityMdp mdp_;
};

}  // namespace fdsm
