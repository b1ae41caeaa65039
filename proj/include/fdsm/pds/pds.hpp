#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fdsm/mdp/models.hpp"
#include "fdsm/mdp/value_iteration.hpp"

namespace fdsm {

// Post-decision state: same hour and demand, storage after the purchase.
// Indexed like AggregatorModel states.
std::size_t pds_index(const AggregatorModel& model, const AggregatorState& state, double action);

// U over post-decision states plus per-entry visit counts.
struct PdsValueTable {
  std::vector<double> u;
  std::vector<std::size_t> visits;

  explicit PdsValueTable(std::size_t size = 0) : u(size, 0.0), visits(size, 0) {}
};

// Learning rate as a function of how often the PDS entry was updated before.
using LearningRate = std::function<double(std::size_t visits)>;

// 1 / (1 + visits).
LearningRate harmonic_rate();
// 1 / (1 + visits)^exponent, exponent in (0.5, 1].
LearningRate polynomial_rate(double exponent);

// U(previous PDS) <- (1 - alpha) U + alpha * sample.
double blend(double current, double sample, double alpha);

struct PdsStep {
  std::size_t choice = 0;     // global choice index of the greedy action
  double value = 0.0;         // fresh V sample at the current state
  std::size_t pds = 0;        // PDS reached by the greedy action
  double updated_u = 0.0;     // new U at the previous PDS (unchanged when none)
};

// Greedy decision at `state` against U and, when `previous_pds` is set, the
// blend of the fresh V sample into U at that PDS. `price` is the announced price.
PdsStep pds_step(const AggregatorModel& model, std::size_t state, double price, PdsValueTable& table,
                 std::optional<std::size_t> previous_pds, double alpha, double discount);

// V(s) = min_a (1 - delta) (c + y a) + delta U(pds(s, a)) with y = prices[class(s)].
ValueTable values_from_pds(const AggregatorModel& model, const PdsValueTable& table,
                           const std::vector<double>& prices, double discount);

// Replaces every U entry by its expectation under the true demand kernel of the
// V derived from the current U. Iterating this from U = 0 is Jacobi value iteration.
void pds_expected_sweep(const AggregatorModel& model, PdsValueTable& table, const std::vector<double>& prices,
                        double discount);

struct LearningPoint {
  std::size_t step = 0;
  double residual = 0.0;     // Bellman residual of the derived V under the true kernel
  double probe_value = 0.0;  // derived V at the probe state
};

struct PdsOptions {
  double discount = 0.99;
  std::size_t steps = 100000;
  std::uint64_t seed = 1;
  double epsilon = 0.1;          // exploration at step 0
  double epsilon_decay = 0.999;  // per step
  LearningRate rate = harmonic_rate();
  std::size_t record_every = 0;  // 0 disables the learning curve
  std::size_t probe_state = 0;
  std::size_t initial_state = 0;
};

struct PdsRunResult {
  PdsValueTable table;
  ValueTable value;
  std::vector<LearningPoint> curve;
};

// Online learning along one trajectory. Next-period demand is drawn from the
// model's demand profile; the learner itself only sees the realized states.
// `prices` holds one announced price per aggregator price class.
PdsRunResult pds_run(const AggregatorModel& model, const std::vector<double>& prices, const PdsOptions& options);

// Columns: step,residual,probe_value.
void write_learning_curve(std::ostream& out, const std::vector<LearningPoint>& curve);

}  // namespace fdsm
