#include "fdsm/mdp/entity_mdp.hpp"

#include <algorithm>
#include <cmath>

#include "fdsm/errors.hpp"

namespace fdsm {

MdpBuilder::MdpBuilder(std::size_t clock_count, std::size_t price_class_count,
                       std::vector<double> amount_levels, std::string label_header) {
  if (clock_count == 0 || price_class_count == 0) throw ModelError("MDP needs at least one clock and price class");
  mdp_.clock_count_ = clock_count;
  mdp_.price_class_count_ = price_class_count;
  mdp_.amount_levels_ = std::move(amount_levels);
  mdp_.label_header_ = std::move(label_header);
  mdp_.clock_states_.resize(clock_count);
}

std::size_t MdpBuilder::add_state(std::size_t clock, std::size_t price_class, std::string label) {
  if (clock >= mdp_.clock_count_) throw ModelError("state clock out of range");
  if (price_class >= mdp_.price_class_count_) throw ModelError("state price class out of range");
  const std::size_t s = mdp_.state_class_.size();
  if (s > 0 && mdp_.state_choice_offset_[s - 1] == mdp_.state_choice_offset_[s]) {
    throw ModelError("state " + std::to_string(s - 1) + " has an empty action set");
  }
  mdp_.state_class_.push_back(price_class);
  mdp_.state_clock_.push_back(clock);
  mdp_.state_clock_position_.push_back(mdp_.clock_states_[clock].size());
  mdp_.clock_states_[clock].push_back(s);
  mdp_.labels_.push_back(std::move(label));
  mdp_.state_choice_offset_.push_back(mdp_.choice_amount_.size());
  return s;
}

void MdpBuilder::add_choice(std::size_t amount_index, double cost, std::vector<Transition> successors) {
  if (mdp_.state_class_.empty()) throw ModelError("choice added before any state");
  if (amount_index >= mdp_.amount_levels_.size()) throw ModelError("choice amount index out of range");
  if (!std::isfinite(cost)) throw ModelError("non-finite stage cost");
  std::sort(successors.begin(), successors.end(),
            [](const Transition& a, const Transition& b) { return a.next < b.next; });
  std::vector<Transition> merged;
  for (const auto& t : successors) {
    if (!(t.probability >= 0.0)) throw ModelError("negative transition probability");
    if (t.probability == 0.0) continue;
    if (!merged.empty() && merged.back().next == t.next) {
      merged.back().probability += t.probability;
    } else {
      merged.push_back(t);
    }
  }
  mdp_.choice_amount_.push_back(mdp_.amount_levels_[amount_index]);
  mdp_.choice_amount_index_.push_back(amount_index);
  mdp_.choice_cost_.push_back(cost);
  mdp_.transitions_.insert(mdp_.transitions_.end(), merged.begin(), merged.end());
  mdp_.choice_transition_offset_.push_back(mdp_.transitions_.size());
  mdp_.state_choice_offset_.back() = mdp_.choice_amount_.size();
}

EntityMdp MdpBuilder::build() && {
  const std::size_t n = mdp_.state_class_.size();
  if (n == 0) throw ModelError("MDP has no states");
  for (std::size_t s = 0; s < n; ++s) {
    if (mdp_.choice_begin(s) == mdp_.choice_end(s)) {
      throw ModelError("state " + std::to_string(s) + " has an empty action set");
    }
    for (std::size_t c = mdp_.choice_begin(s); c < mdp_.choice_end(s); ++c) {
      double total = 0.0;
      for (const auto& t : mdp_.transitions(c)) {
        if (t.next >= n) throw ModelError("transition to unknown state");
        if (mdp_.state_clock_[t.next] != (mdp_.state_clock_[s] + 1) % mdp_.clock_count_) {
          throw ModelError("transition breaks the clock order");
        }
        total += t.probability;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw ModelError("transition probabilities of state " + std::to_string(s) + " sum to " +
                         std::to_string(total));
      }
    }
  }
  return std::move(mdp_);
}

}  // namespace fdsm
