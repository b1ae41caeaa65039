#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdsm/coord/coordinator.hpp"
#include "fdsm/coord/system.hpp"
#include "fdsm/mdp/joint_solver.hpp"

namespace fdsm {

enum class StrategyKind { proposed, centralized, myopic, lyapunov, mumdp };

std::string_view strategy_name(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);
const std::vector<StrategyKind>& all_strategies();

// argmin_a c(s, a) + price * a; global choice index, lowest action on ties.
std::size_t myopic_decide(const AggregatorModel& model, std::size_t state, double price);

// Drift added by the single-user Lyapunov rule: (e + a - d)^2 - e^2, or (e + a)^2 - e^2
// for the variant without demand.
enum class DriftForm { with_demand, without_demand };
double lyapunov_drift(double storage, double action, double demand, DriftForm form = DriftForm::with_demand);

// argmin_a c(s, a) + price * a + drift; global choice index, lowest action on ties.
std::size_t lyapunov_decide(const AggregatorModel& model, std::size_t state, double price,
                            DriftForm form = DriftForm::with_demand);

// Coordinator options for the single-shared-multiplier baseline.
CoordinatorOptions mumdp_options(CoordinatorOptions options);

// Exogenous derated-line process as a component MDP: state (hour, line), one
// zero-cost choice, uniform next line.
EntityMdp line_process_mdp(std::size_t clock_count, std::size_t line_count);

// Joint problem over generators, aggregators and the line process; joint
// choices that violate a network constraint are forbidden.
class CentralizedPlanner {
 public:
  explicit CentralizedPlanner(const DsmSystem& system);
  CentralizedPlanner(const CentralizedPlanner&) = delete;
  CentralizedPlanner& operator=(const CentralizedPlanner&) = delete;

  // Joint state count of the product MDP.
  std::size_t state_count() const;
  // Throws IntractableError above the state limit.
  void solve(const SolveOptions& options, std::size_t state_limit = 100000);
  bool solved() const { return solution_.has_value(); }

  // Global choice per component for the joint state made of the given component states.
  std::vector<std::size_t> decide(const std::vector<std::size_t>& generator_states,
                                  const std::vector<std::size_t>& aggregator_states, std::size_t line_state) const;
  const JointSolution& solution() const { return *solution_; }
  const std::vector<const EntityMdp*>& components() const { return components_; }
  // Line process state for (hour, derated line); 0 without degradation.
  std::size_t line_state(std::size_t hour, std::size_t line) const;

 private:
  const DsmSystem* system_;
  EntityMdp line_mdp_;
  std::vector<const EntityMdp*> components_;
  std::size_t line_outcomes_ = 1;
  std::optional<JointSolution> solution_;
};

}  // namespace fdsm
