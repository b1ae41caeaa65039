#pragma once

#include <optional>
#include <vector>

#include "fdsm/grid/constraints.hpp"

namespace fdsm {

struct GeneratorCost {
  double quadratic = 0.0;  // $ / MW^2
  double linear = 0.0;     // $ / MW
  double ramp = 0.0;       // $ / MW^2 of change from the previous output

  double operator()(double previous, double output) const {
    const double change = output - previous;
    return quadratic * output * output + linear * output + ramp * change * change;
  }
};

struct DispatchNetwork {
  ConstraintSet constraints;
  std::vector<GeneratorCost> costs;  // one per generator column
  double shed_cost = 1.0e5;          // $ per MW of withdrawal the network cannot serve
};

struct DispatchRequest {
  std::vector<double> purchases;    // MW per aggregator
  std::vector<double> previous;     // MW per generator, last period's output
  std::vector<double> max_output;   // MW per generator this period
  std::vector<double> capacities;   // MW per line this period
};

struct DispatchResult {
  std::vector<double> generation;
  std::vector<double> shed;  // MW not delivered per aggregator
  double generation_cost = 0.0;
  bool converged = false;

  bool shed_any(double tol = 1e-6) const;
};

// One-period minimum generation cost dispatch: balance, line limits at the
// current capacities, output bounds; unserved withdrawal is priced at shed_cost.
DispatchResult economic_dispatch(const DispatchNetwork& network, const DispatchRequest& request);

// Forward-difference marginal cost of one more `step` MW at each aggregator.
// Empty when the base or any perturbed dispatch has to shed.
std::optional<std::vector<double>> locational_prices(const DispatchNetwork& network, const DispatchRequest& request,
                                                     double step);

}  // namespace fdsm
