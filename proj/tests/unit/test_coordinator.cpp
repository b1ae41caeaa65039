#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "fdsm/coord/coordinator.hpp"
#include "fdsm/errors.hpp"
#include "fdsm/grid/ptdf.hpp"
#include "toy_systems.hpp"

using namespace fdsm;
using namespace fdsm::test;

namespace {

ConstraintSet two_bus_constraints() {
  GridModel grid = parse_cdf_text(make_case({bus_record(1, 3, 0), bus_record(2, 0, 10)}, {branch_record(1, 2, 0.5, 50)}));
  grid.assign_entities({1}, {2});
  return assemble_constraints(grid, build_ptdf(grid, 1));
}

// Stationary distribution of a small chain by solving mu (P - I) = 0, sum mu = 1.
Eigen::VectorXd stationary_oracle(const Eigen::MatrixXd& p) {
  const auto n = p.rows();
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = (p - Eigen::MatrixXd::Identity(n, n)).transpose();
  a.row(n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace

TEST_CASE("conjectured price is the multiplier-weighted constraint column") {
  const ConstraintSet cs = two_bus_constraints();
  const EntityRef agg{EntityRef::Kind::aggregator, 0};
  const EntityRef gen{EntityRef::Kind::generator, 0};
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(3);
  CHECK(price_from_multiplier(lambda, cs, agg) == 0.0);
  CHECK(price_from_multiplier(lambda, cs, gen) == 0.0);

  lambda(cs.supply_row()) = 7.0;
  CHECK(price_from_multiplier(lambda, cs, agg) == doctest::Approx(7.0));
  CHECK(price_from_multiplier(lambda, cs, gen) == doctest::Approx(-7.0));

  // Withdrawal at bus 2 moves flow 1 -> 2 by +1 per MW: coefficient +1 on the upper flow row.
  lambda.setZero();
  lambda(0) = 3.0;
  const double expected = lambda.dot(cs.coeff_agg.col(0));
  CHECK(expected == doctest::Approx(3.0));
  CHECK(price_from_multiplier(lambda, cs, agg) == doctest::Approx(3.0));
  CHECK(price_from_multiplier(lambda, cs, gen) == doctest::Approx(0.0));  // slack bus column is zero
}

TEST_CASE("multiplier update is a projected step") {
  CHECK(update_multipliers(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 3.0), 1.0)(0) == 3.0);
  CHECK(update_multipliers(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -4.0), 0.5)(0) == 0.0);
  CHECK(step_size(0) == 1.0);
  CHECK(step_size(9) == doctest::Approx(0.1));
  CHECK_THROWS_AS(update_multipliers(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.0), DomainError);
}

TEST_CASE("multiplier table is lazy and starts at zero") {
  MultiplierTable table(5);
  CHECK_FALSE(table.contains(42));
  CHECK(table.at(42).isZero());
  table.set(42, Eigen::VectorXd::Constant(5, 1.5));
  CHECK(table.contains(42));
  CHECK_THROWS_AS(table.set(1, Eigen::VectorXd::Constant(5, -1.0)), DomainError);
}

TEST_CASE("purchase averager keeps the running sum") {
  PurchaseAverager avg(2);
  avg.add({2.0, 4.0});
  avg.add({4.0, 0.0});
  CHECK(avg.count() == 2);
  CHECK(avg.sums()[0] == 6.0);
  CHECK(avg.average()[0] == 3.0);
  CHECK(avg.average()[1] == 2.0);
}

TEST_CASE("convergence check on value tables") {
  const std::vector<ValueTable> a{{{1.0, 2.0}}, {{3.0}}};
  std::vector<ValueTable> b = a;
  CHECK(has_converged(a, b, {1e-3, 1e-3}));
  b[1].values[0] += 2e-3;
  CHECK_FALSE(has_converged(a, b, {1e-3, 1e-3}));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(has_converged(a, b, {inf, inf}));
  std::vector<ValueTable> c{{{1.0}}, {{3.0}}};
  CHECK_THROWS_AS(has_converged(a, c, {1.0, 1.0}), ModelError);
}

TEST_CASE("ISO key space enumerates hour, renewable level and derated line") {
  ScenarioSpec spec = toy_spec();
  spec.clock_count = 2;
  spec.demand.peak_first = 1;
  spec.demand.peak_last = 1;
  spec.degrade_lines = true;
  spec.renewable_count = 1;
  spec.renewable_mean = 10.0;
  spec.renewable_deviation = 5.0;
  spec.renewable_levels = 3;
  spec.renewable_step = 5.0;
  const DsmSystem sys = build_system(spec);
  const IsoKeySpace keys(sys);
  CHECK(keys.size() == 2 * 3 * 3);
  for (std::size_t h = 0; h < 2; ++h) {
    double total = 0.0;
    for (std::size_t k = h * keys.keys_per_hour(); k < (h + 1) * keys.keys_per_hour(); ++k) {
      CHECK(keys.hour_of(k) == h);
      total += keys.probability_given_hour(k);
    }
    CHECK(total == doctest::Approx(1.0));
  }
  const std::size_t key = keys.key(1, {2}, 1);
  CHECK(keys.hour_of(key) == 1);
  CHECK(keys.line_of(key) == 1);
  CHECK(keys.renewable_levels(key) == std::vector<std::size_t>{2});
  CHECK(keys.probability_given_hour(key) == doctest::Approx(0.25 / 3.0));
  CHECK(keys.probability_given_generator_class(key, 0) == doctest::Approx(1.0 / 3.0));
  const auto caps = keys.capacities(key);
  CHECK(caps[1] == doctest::Approx(900.0));
  CHECK(caps[0] == doctest::Approx(1000.0));
}

TEST_CASE("stationary marginals match a direct linear solve") {
  // Aggregator with stochastic demand and storage; a fixed state-dependent policy.
  const DsmSystem sys = build_system(toy_spec());
  const EntityMdp& mdp = sys.aggregators[0].mdp();
  std::vector<std::vector<std::size_t>> choices(mdp.state_count());
  for (std::size_t s = 0; s < mdp.state_count(); ++s) choices[s] = {mdp.choice_begin(s) + (s * 7) % 5};
  const auto mu = stationary_marginals(mdp, {{1.0}}, choices);

  const auto n = static_cast<Eigen::Index>(mdp.state_count());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    for (const auto& t : mdp.transitions(choices[s][0])) p(static_cast<Eigen::Index>(s), t.next) += t.probability;
  }
  const Eigen::VectorXd oracle = stationary_oracle(p);
  for (std::size_t s = 0; s < mdp.state_count(); ++s) CHECK(mu[s] == doctest::Approx(oracle(static_cast<Eigen::Index>(s))).epsilon(1e-9));
}

TEST_CASE("expected constraint values match an independent stationary computation") {
  const DsmSystem sys = build_system(toy_spec());
  Coordinator coord(sys, {});
  MultiplierTable table(sys.constraints.rows());
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.constraints.rows()));
  lambda(static_cast<Eigen::Index>(sys.constraints.supply_row())) = 3.0;
  table.set(0, lambda);
  coord.set_multipliers(table);
  coord.solve_entities();
  const Eigen::VectorXd f = coord.expected_constraints()[0];

  double purchases = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const EntityMdp& mdp = sys.aggregators[i].mdp();
    const auto n = static_cast<Eigen::Index>(mdp.state_count());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> amount(mdp.state_count());
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
      const std::size_t c = coord.aggregator_choice(i, s, 0);
      amount[s] = mdp.amount(c);
      for (const auto& t : mdp.transitions(c)) p(static_cast<Eigen::Index>(s), t.next) += t.probability;
    }
    const Eigen::VectorXd mu = stationary_oracle(p);
    for (std::size_t s = 0; s < mdp.state_count(); ++s) purchases += mu(static_cast<Eigen::Index>(s)) * amount[s];
  }
  // Without ramping the generator's choice does not depend on its previous output.
  const double generation = sys.generators[0].mdp().amount(coord.generator_choice(0, 0, 0));
  CHECK(generation == doctest::Approx(3.0));
  CHECK(f(static_cast<Eigen::Index>(sys.constraints.supply_row())) == doctest::Approx(purchases - generation).epsilon(1e-12));
}

TEST_CASE("exact-mean iterations follow the deterministic projected subgradient recursion") {
  const DsmSystem sys = build_system(toy_spec());
  Coordinator coord(sys, {});
  for (std::size_t k = 0; k < 25; ++k) {
    const Eigen::VectorXd before = coord.lambda(0);
    coord.exact_iteration();
    const Eigen::VectorXd expected = (before + coord.last_constraints()[0] / static_cast<double>(k + 1)).cwiseMax(0.0);
    CHECK((coord.lambda(0) - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((coord.lambda(0).array() >= 0.0).all());
  }
}

TEST_CASE("price table is always recomputable from the multiplier table") {
  ScenarioSpec spec = toy_spec();
  spec.degrade_lines = true;
  spec.default_line_capacity = 4.0;
  const DsmSystem sys = build_system(spec);
  Coordinator coord(sys, {});
  for (int k = 0; k < 10; ++k) coord.exact_iteration();
  const PriceTable rebuilt = rebuild_prices(coord.multipliers(), sys.constraints);
  REQUIRE(rebuilt.entries().size() == coord.prices().entries().size());
  for (const auto& [key, entry] : coord.prices().entries()) {
    CHECK((entry.aggregator - rebuilt.at(key).aggregator).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((entry.generator - rebuilt.at(key).generator).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("rounds with zero requests and zero production leave flow multipliers non-increasing") {
  const DsmSystem sys = build_system(toy_spec());
  Coordinator coord(sys, {});
  const auto supply = static_cast<Eigen::Index>(sys.constraints.supply_row());
  const RoundDiagnostics first = coord.round(0, {4.0, 4.0}, {0.0});
  CHECK(first.f_hat(supply) == doctest::Approx(8.0));
  CHECK(first.lambda(supply) == doctest::Approx(8.0));
  const Eigen::VectorXd before = coord.lambda(0);
  const RoundDiagnostics zero = coord.round(0, {0.0, 0.0}, {0.0});
  CHECK(zero.visit == 1);
  for (Eigen::Index r = 0; r < supply; ++r) {
    CHECK(zero.f_hat(r) < 0.0);
    CHECK(zero.lambda(r) <= before(r));
  }
  // Averaged purchases (4 + 0) / 2 per aggregator keep the supply row positive.
  CHECK(zero.f_hat(supply) == doctest::Approx(4.0));
}

TEST_CASE("off-grid purchase requests are protocol errors") {
  const DsmSystem sys = build_system(toy_spec());
  Coordinator coord(sys, {});
  CHECK_THROWS_AS(coord.round(0, {1.5, 0.0}, {0.0}), ProtocolError);
  CHECK_THROWS_AS(coord.round(0, {1.0}, {0.0}), ProtocolError);
  CHECK_THROWS_AS(coord.round(7, {1.0, 1.0}, {0.0}), ProtocolError);
}

TEST_CASE("seeded round sequences give identical multiplier trajectories") {
  ScenarioSpec spec = toy_spec();
  spec.degrade_lines = true;
  spec.default_line_capacity = 5.0;
  const DsmSystem sys = build_system(spec);
  auto run = [&]() {
    Coordinator coord(sys, {});
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> level(0, 6);
    std::uniform_int_distribution<std::size_t> key(0, coord.keys().size() - 1);
    std::vector<double> trace;
    for (int t = 0; t < 200; ++t) {
      const std::size_t k = key(rng);
      const auto d = coord.round(k, {double(level(rng)), double(level(rng))}, {double(level(rng))});
      CHECK((d.lambda.array() >= 0.0).all());
      trace.insert(trace.end(), d.lambda.data(), d.lambda.data() + d.lambda.size());
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("oversubscribed supply row: multiplier rises until purchases match generation") {
  const DsmSystem sys = build_system(deterministic_toy_spec());
  CoordinatorOptions opts;
  opts.max_iterations = 400;
  opts.convergence_tolerance = 0.0;
  Coordinator coord(sys, opts);
  const auto supply = static_cast<Eigen::Index>(sys.constraints.supply_row());
  double previous = 0.0;
  bool rising = true;
  for (std::size_t k = 0; k < opts.max_iterations; ++k) {
    coord.exact_iteration();
    const double f = coord.last_constraints()[0](supply);
    const double now = coord.lambda(0)(supply);
    if (rising) {
      if (f > 0.0) {
        CHECK(now > previous);
      } else {
        rising = false;
      }
    }
    previous = now;
  }
  CHECK_FALSE(rising);
  coord.solve_entities();
  const Eigen::VectorXd f = coord.expected_constraints()[0];
  const Eigen::VectorXd lambda = coord.lambda(0);
  // KKT: primal feasibility and complementary slackness of the expected constraint.
  CHECK(f.maxCoeff() <= 1e-3);
  CHECK(std::abs(lambda.dot(f)) <= 1e-3);
}

TEST_CASE("single multiplier mode coincides with per-state multipliers when there is one ISO state") {
  const DsmSystem sys = build_system(toy_spec());
  CoordinatorOptions per_state;
  CoordinatorOptions shared;
  shared.single_multiplier = true;
  Coordinator a(sys, per_state);
  Coordinator b(sys, shared);
  for (int k = 0; k < 30; ++k) {
    a.exact_iteration();
    b.exact_iteration();
    CHECK((a.lambda(0) - b.lambda(0)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("diagnostics stream has one row per ISO state and iteration") {
  ScenarioSpec spec = toy_spec();
  spec.degrade_lines = true;
  const DsmSystem sys = build_system(spec);
  Coordinator coord(sys, {});
  std::ostringstream out;
  coord.exact_iteration(&out);
  coord.exact_iteration(&out);
  std::size_t rows = 0;
  std::string line;
  std::istringstream in(out.str());
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * coord.keys().size());
  CHECK(std::string(Coordinator::diagnostics_header()).rfind("k,key,", 0) == 0);
}
