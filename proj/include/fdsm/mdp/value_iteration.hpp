#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fdsm/mdp/entity_mdp.hpp"

namespace fdsm {

struct PriceAtom {
  double price = 0.0;
  double weight = 1.0;
};

// Distribution of the announced price seen by an entity, one per price class.
// A single atom per class reduces every solve to the fixed-price Bellman equation.
class PriceSchedule {
 public:
  PriceSchedule() = default;
  explicit PriceSchedule(std::vector<std::vector<PriceAtom>> per_class);
  static PriceSchedule constant(double price, std::size_t class_count);

  std::size_t class_count() const { return atoms_.size(); }
  const std::vector<PriceAtom>& atoms(std::size_t price_class) const { return atoms_[price_class]; }
  double mean(std::size_t price_class) const;

  // Rounds prices to `resolution`, merges equal prices and sorts ascending.
  static std::vector<PriceAtom> merge(std::vector<PriceAtom> atoms, double resolution);

 private:
  std::vector<std::vector<PriceAtom>> atoms_;
};

struct ValueTable {
  std::vector<double> values;
};

// Local action index (position within the state's action list) per state.
struct PolicyTable {
  std::vector<std::size_t> actions;
};

enum class SweepOrder { jacobi, gauss_seidel };

struct SolveOptions {
  double discount = 0.99;
  double tolerance = 1e-9;
  std::size_t max_sweeps = 200000;
  // Gauss-Seidel visits clocks in reverse order, which propagates a whole day per sweep.
  SweepOrder order = SweepOrder::gauss_seidel;
};

struct SolveResult {
  ValueTable value;
  PolicyTable policy;
  double residual = 0.0;  // sup-norm Bellman residual of the input to the final sweep
  std::size_t sweeps = 0;
  std::vector<double> residual_history;
};

// V(s) = sum_j w_j min_a (1 - delta) (c(s,a) + y_j * amount(a)) + delta * E[V(s')].
SolveResult value_iterate(const EntityMdp& mdp, const PriceSchedule& prices, const SolveOptions& options,
                          const ValueTable* warm_start = nullptr);

SolveResult value_iterate(const EntityMdp& mdp, double price, double discount, double tolerance);

// Generator subproblem; identical Bellman operator with the generator's own price.
SolveResult iso_generator_solve(const EntityMdp& generator, double price, double discount, double tolerance);
SolveResult iso_generator_solve(const EntityMdp& generator, const PriceSchedule& prices,
                                const SolveOptions& options, const ValueTable* warm_start = nullptr);

// E[V(s') | choice].
double continuation(const EntityMdp& mdp, const ValueTable& value, std::size_t choice);

double q_value(const EntityMdp& mdp, const ValueTable& value, std::size_t choice, double price,
               double discount);

// Global choice index minimising the Q-value at `price`; lowest action wins ties.
std::size_t greedy_choice(const EntityMdp& mdp, const ValueTable& value, std::size_t state, double price,
                          double discount);

PolicyTable greedy_policy(const EntityMdp& mdp, const ValueTable& value, double price, double discount);

double bellman_residual(const EntityMdp& mdp, const ValueTable& value, const PriceSchedule& prices,
                        double discount);

// Debug dump: label columns, value, action index and amount.
std::string table_csv(const EntityMdp& mdp, const ValueTable& value, const PolicyTable& policy);

void check_discount(double discount);

}  // namespace fdsm
