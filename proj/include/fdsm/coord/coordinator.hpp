#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include "fdsm/coord/system.hpp"
#include "fdsm/mdp/value_iteration.hpp"

namespace fdsm {

struct EntityRef {
  enum class Kind { generator, aggregator };
  Kind kind = Kind::aggregator;
  std::size_t index = 0;
};

// lambda' * (column of the entity in f); generator columns carry injection signs.
double price_from_multiplier(const Eigen::VectorXd& lambda, const ConstraintSet& constraints, EntityRef entity);

// max(lambda + step * f_hat, 0) element-wise.
Eigen::VectorXd update_multipliers(const Eigen::VectorXd& lambda, const Eigen::VectorXd& f_hat, double step);

inline double step_size(std::size_t k) { return 1.0 / static_cast<double>(k + 1); }

// Lazily created per-key multiplier vectors; absent keys read as zero.
class MultiplierTable {
 public:
  explicit MultiplierTable(std::size_t rows = 0) : zero_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows))) {}

  std::size_t rows() const { return static_cast<std::size_t>(zero_.size()); }
  bool contains(std::size_t key) const { return entries_.count(key) > 0; }
  const Eigen::VectorXd& at(std::size_t key) const;
  void set(std::size_t key, Eigen::VectorXd lambda);
  const std::map<std::size_t, Eigen::VectorXd>& entries() const { return entries_; }

 private:
  Eigen::VectorXd zero_;
  std::map<std::size_t, Eigen::VectorXd> entries_;
};

struct PriceEntry {
  Eigen::VectorXd aggregator;  // per aggregator
  Eigen::VectorXd generator;   // per generator
};

PriceEntry prices_from_multiplier(const Eigen::VectorXd& lambda, const ConstraintSet& constraints);

class PriceTable {
 public:
  explicit PriceTable(const ConstraintSet* constraints = nullptr);
  const PriceEntry& at(std::size_t key) const;
  void set(std::size_t key, PriceEntry entry) { entries_[key] = std::move(entry); }
  const std::map<std::size_t, PriceEntry>& entries() const { return entries_; }

 private:
  PriceEntry zero_;
  std::map<std::size_t, PriceEntry> entries_;
};

PriceTable rebuild_prices(const MultiplierTable& multipliers, const ConstraintSet& constraints);

// Running sum of purchase requests; average() = sum / count.
class PurchaseAverager {
 public:
  explicit PurchaseAverager(std::size_t aggregators = 0) : sums_(aggregators, 0.0) {}
  void add(const std::vector<double>& requests);
  std::size_t count() const { return count_; }
  const std::vector<double>& sums() const { return sums_; }
  std::vector<double> average() const;

 private:
  std::vector<double> sums_;
  std::size_t count_ = 0;
};

// True iff every entity's sup-norm change is within its tolerance.
bool has_converged(const std::vector<ValueTable>& before, const std::vector<ValueTable>& after,
                   const std::vector<double>& tolerance);

// Price announced to entities: the conjectured price rounded to the cache resolution.
double quantize_price(double price, double resolution);

struct CoordinatorOptions {
  double discount = 0.99;
  double solve_tolerance = 1e-6;      // per-entity value iteration
  std::size_t max_iterations = 200;   // exact-mean iterations
  std::size_t min_iterations = 1;
  double convergence_tolerance = 1e-3;  // sup-norm value change per entity
  double step_scale = 1.0;              // multiplies 1/(k+1)
  double price_resolution = 0.01;
  bool single_multiplier = false;       // one multiplier vector for all ISO states
};

struct RoundDiagnostics {
  std::size_t key = 0;
  std::size_t visit = 0;  // k for this multiplier entry
  Eigen::VectorXd f_hat;
  Eigen::VectorXd lambda;
  PriceEntry prices;
};

struct IterationSummary {
  std::size_t iteration = 0;
  double max_value_change = 0.0;
  double max_violation = 0.0;        // largest positive expected constraint value
  double mean_supply_multiplier = 0.0;
  double max_residual = 0.0;         // largest entity Bellman residual
  bool converged = false;
};

class Coordinator {
 public:
  Coordinator(const DsmSystem& system, CoordinatorOptions options);

  const DsmSystem& system() const { return *system_; }
  const IsoKeySpace& keys() const { return keys_; }
  const CoordinatorOptions& options() const { return options_; }
  const MultiplierTable& multipliers() const { return multipliers_; }
  const PriceTable& prices() const { return prices_; }
  // Replaces the multipliers (warm start or what-if evaluation) and recomputes prices.
  void set_multipliers(const MultiplierTable& table);
  std::size_t entity_count() const { return mdps_.size(); }

  // Multiplier governing an ISO state (the shared one in single-multiplier mode).
  const Eigen::VectorXd& lambda(std::size_t key) const;
  const PriceEntry& price_entry(std::size_t key) const;
  double aggregator_price(std::size_t aggregator, std::size_t key) const;
  double generator_price(std::size_t generator, std::size_t key) const;

  // Re-solves every entity against the price distribution implied by the current multipliers.
  void solve_entities();
  bool solved() const { return !values_.empty(); }

  // Greedy decisions at the announced (quantized) price of `key`; global choice indices.
  std::size_t aggregator_choice(std::size_t aggregator, std::size_t state, std::size_t key) const;
  std::size_t generator_choice(std::size_t generator, std::size_t state, std::size_t key) const;
  const ValueTable& aggregator_value(std::size_t aggregator) const;
  const ValueTable& generator_value(std::size_t generator) const;
  const std::vector<ValueTable>& values() const { return values_; }

  // Run-time round at ISO state `key`: averages requests, evaluates f at the ISO
  // actions and the empirical mean purchases, and updates the multiplier for `key`.
  RoundDiagnostics round(std::size_t key, const std::vector<double>& requests, const std::vector<double>& generation);

  // Expected constraint value per key under the current solutions (exact-mean mode).
  std::vector<Eigen::VectorXd> expected_constraints() const;
  // Expected constraint values used by the most recent exact iteration.
  const std::vector<Eigen::VectorXd>& last_constraints() const { return last_constraints_; }

  // One exact-mean iteration: solve, compute expected f per key, update multipliers.
  IterationSummary exact_iteration(std::ostream* diagnostics = nullptr);
  std::vector<IterationSummary> run_exact(std::ostream* diagnostics = nullptr);
  std::size_t iteration() const { return iteration_; }

  static const char* diagnostics_header();

 private:
  struct Slot {
    const EntityMdp* mdp;
    EntityRef ref;
    // Per price class: (key, P(key | class)).
    std::vector<std::vector<std::pair<std::size_t, double>>> class_keys;
  };

  double entity_price(const Slot& slot, std::size_t key) const;
  std::size_t choice_at(std::size_t entity, std::size_t state, std::size_t key) const;
  std::size_t multiplier_key(std::size_t key) const { return options_.single_multiplier ? 0 : key; }
  void refresh_prices(std::size_t mkey);
  std::vector<std::vector<double>> expected_amounts() const;

  const DsmSystem* system_;
  CoordinatorOptions options_;
  IsoKeySpace keys_;
  std::vector<Slot> mdps_;  // generators first, then aggregators
  std::vector<Eigen::VectorXd> offsets_;
  MultiplierTable multipliers_;
  PriceTable prices_;
  std::vector<ValueTable> values_;
  std::vector<double> residuals_;
  std::vector<Eigen::VectorXd> last_constraints_;
  std::map<std::size_t, PurchaseAverager> averagers_;
  std::map<std::size_t, std::size_t> visits_;
  std::size_t iteration_ = 0;
};

// Stationary hour marginals of an entity whose choice at state s depends on an
// exogenous key drawn from its price class: choice(s, j) for the j-th key of
// class(s) with probability weights[class][j]. Returns mu with sum 1 per clock.
std::vector<double> stationary_marginals(
    const EntityMdp& mdp, const std::vector<std::vector<double>>& class_weights,
    const std::vector<std::vector<std::size_t>>& state_choices);

}  // namespace fdsm
