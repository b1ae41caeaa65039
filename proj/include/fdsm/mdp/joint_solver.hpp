#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fdsm/mdp/entity_mdp.hpp"
#include "fdsm/mdp/value_iteration.hpp"

namespace fdsm {

// Enumerates joint states of clock-synchronised components: at clock h the
// joint state is a tuple of component states that all carry clock h.
class JointIndex {
 public:
  explicit JointIndex(std::vector<const EntityMdp*> components);

  std::size_t size() const { return offsets_.back(); }
  std::size_t component_count() const { return components_.size(); }
  std::size_t clock_count() const { return clock_count_; }
  std::size_t clock_begin(std::size_t h) const { return offsets_[h]; }
  std::size_t clock_end(std::size_t h) const { return offsets_[h + 1]; }

  std::size_t encode(std::span<const std::size_t> states) const;
  std::vector<std::size_t> decode(std::size_t joint) const;
  std::size_t clock_of(std::size_t joint) const;

  const EntityMdp& component(std::size_t c) const { return *components_[c]; }

 private:
  std::vector<const EntityMdp*> components_;
  std::size_t clock_count_ = 1;
  std::vector<std::size_t> offsets_;
};

// Joint state count without building anything; used by the tractability guard.
std::size_t joint_state_count(const std::vector<const EntityMdp*>& components);

struct JointProblem {
  std::vector<const EntityMdp*> components;
  // Extra stage cost of a joint choice (component-global choice indices); +inf forbids it.
  // Empty means no coupling.
  std::function<double(std::span<const std::size_t> states, std::span<const std::size_t> choices)> coupling_cost;
  std::size_t state_limit = 100000;
  std::size_t table_limit = 60'000'000;  // joint state-action pairs kept in memory
};

struct JointSolution {
  JointIndex index;
  std::vector<double> value;
  // policy[joint * components + c] = global choice index of component c.
  std::vector<std::size_t> policy;
  double residual = 0.0;
  std::size_t sweeps = 0;

  std::vector<std::size_t> choices(std::size_t joint) const;
};

// Minimises the summed discounted stage cost (component costs + coupling) over
// admissible joint choices. Throws IntractableError above the state limit.
JointSolution centralized_solve(const JointProblem& problem, const SolveOptions& options);

}  // namespace fdsm
