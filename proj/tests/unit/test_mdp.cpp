#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fdsm/errors.hpp"
#include "fdsm/mdp/joint_solver.hpp"
#include "fdsm/mdp/models.hpp"
#include "fdsm/mdp/value_iteration.hpp"

using namespace fdsm;

namespace {

EntityMdp single_state(double cost) {
  MdpBuilder b(1, 1, {0.0}, "s");
  b.add_state(0, 0, "0");
  b.add_choice(0, cost, {{0, 1.0}});
  return std::move(b).build();
}

// Two states, two purchase amounts {0, 1}; buying moves toward state 1.
EntityMdp two_by_two() {
  MdpBuilder b(1, 1, {0.0, 1.0}, "s");
  b.add_state(0, 0, "low");
  b.add_choice(0, 3.0, {{0, 0.7}, {1, 0.3}});
  b.add_choice(1, 1.0, {{0, 0.2}, {1, 0.8}});
  b.add_state(0, 0, "high");
  b.add_choice(0, 0.5, {{0, 0.6}, {1, 0.4}});
  b.add_choice(1, 2.0, {{0, 0.1}, {1, 0.9}});
  return std::move(b).build();
}

// Exact value of a stationary policy: (I - delta P) V = (1 - delta)(c + y a).
Eigen::VectorXd policy_value(const EntityMdp& mdp, const std::vector<std::size_t>& local, double price,
                             double delta) {
  const auto n = static_cast<Eigen::Index>(mdp.state_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const std::size_t c = mdp.choice_begin(static_cast<std::size_t>(s)) + local[static_cast<std::size_t>(s)];
    rhs(s) = (1.0 - delta) * (mdp.cost(c) + price * mdp.amount(c));
    for (const auto& t : mdp.transitions(c)) a(s, t.next) -= delta * t.probability;
  }
  return a.partialPivLu().solve(rhs);
}

AggregatorSpec small_aggregator(std::size_t hours, double capacity, double penalty = 1000.0) {
  AggregatorSpec spec;
  for (std::size_t h = 0; h < hours; ++h) {
    std::vector<double> levels, probs;
    uniform_demand_levels(h % 2 == 0 ? 4.0 : 6.0, 2.0, 3, 1.0, levels, probs);
    spec.demand.levels.push_back(levels);
    spec.demand.probabilities.push_back(probs);
  }
  spec.storage_levels = uniform_grid(capacity, 1.0);
  spec.action_levels = uniform_grid(12.0, 1.0);
  spec.penalty = penalty;
  return spec;
}

ConventionalSpec small_conventional(std::size_t hours) {
  ConventionalSpec spec;
  spec.output_levels = uniform_grid(20.0, 5.0);
  spec.clock_count = hours;
  return spec;
}

RenewableSpec small_renewable(std::size_t hours, double unit_cost) {
  RenewableSpec spec;
  spec.output_levels = uniform_grid(20.0, 5.0);
  spec.capacity_levels = {10.0, 20.0};
  spec.capacity_probabilities = {0.5, 0.5};
  spec.unit_cost = unit_cost;
  spec.clock_count = hours;
  return spec;
}

}  // namespace

TEST_CASE("value iteration on a single absorbing state returns the stage cost") {
  const auto result = value_iterate(single_state(5.0), 0.0, 0.9, 1e-12);
  CHECK(result.value.values[0] == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("zero costs at zero price give a zero value table") {
  AggregatorSpec spec = small_aggregator(2, 3.0);
  spec.storage_cost = 0.0;
  spec.penalty = 0.0;
  const AggregatorModel model(spec);
  const auto result = value_iterate(model.mdp(), 0.0, 0.95, 1e-12);
  for (double v : result.value.values) CHECK(v == 0.0);
}

TEST_CASE("value iteration matches exhaustive policy evaluation on a 2x2 MDP") {
  const EntityMdp mdp = two_by_two();
  for (double price : {0.0, 0.7, 2.5}) {
    for (double delta : {0.0, 0.5, 0.9}) {
      Eigen::VectorXd best = Eigen::VectorXd::Constant(2, 1e300);
      for (std::size_t p0 = 0; p0 < 2; ++p0) {
        for (std::size_t p1 = 0; p1 < 2; ++p1) best = best.cwiseMin(policy_value(mdp, {p0, p1}, price, delta));
      }
      const auto result = value_iterate(mdp, price, delta, 1e-13);
      CHECK(result.value.values[0] == doctest::Approx(best(0)).epsilon(1e-10));
      CHECK(result.value.values[1] == doctest::Approx(best(1)).epsilon(1e-10));
      const Eigen::VectorXd greedy = policy_value(mdp, result.policy.actions, price, delta);
      CHECK(greedy(0) == doctest::Approx(best(0)).epsilon(1e-9));
      CHECK(greedy(1) == doctest::Approx(best(1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("value iteration rejects a discount of one or more") {
  CHECK_THROWS_AS(value_iterate(single_state(1.0), 0.0, 1.0, 1e-9), DomainError);
  CHECK_THROWS_AS(value_iterate(single_state(1.0), 0.0, 1.5, 1e-9), DomainError);
}

TEST_CASE("an empty action set is a model error") {
  MdpBuilder b(1, 1, {0.0}, "s");
  b.add_state(0, 0, "a");
  CHECK_THROWS_AS(b.add_state(0, 0, "b"), ModelError);
  MdpBuilder c(1, 1, {0.0}, "s");
  c.add_state(0, 0, "a");
  CHECK_THROWS_AS(std::move(c).build(), ModelError);
}

TEST_CASE("kernels must be stochastic") {
  MdpBuilder b(1, 1, {0.0}, "s");
  b.add_state(0, 0, "a");
  b.add_choice(0, 0.0, {{0, 0.6}});
  CHECK_THROWS_AS(std::move(b).build(), ModelError);
  MdpBuilder c(1, 1, {0.0}, "s");
  c.add_state(0, 0, "a");
  CHECK_THROWS_AS(c.add_choice(0, 0.0, {{0, -0.1}, {0, 1.1}}), ModelError);
}

TEST_CASE("every constructor yields stochastic kernels") {
  const AggregatorModel agg(small_aggregator(3, 4.0));
  const GeneratorModel conv = GeneratorModel::conventional(small_conventional(3));
  const GeneratorModel ren = GeneratorModel::renewable(small_renewable(3, 1.0));
  for (const EntityMdp* mdp : {&agg.mdp(), &conv.mdp(), &ren.mdp()}) {
    for (std::size_t c = 0; c < mdp->choice_count(); ++c) {
      double total = 0.0;
      for (const auto& t : mdp->transitions(c)) {
        CHECK(t.probability >= 0.0);
        total += t.probability;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("aggregator stage cost follows the storage and penalty terms") {
  AggregatorSpec spec;
  spec.penalty = 1000.0;
  CHECK(aggregator_stage_cost(spec, 4.0, 7.0, 10.0) == doctest::Approx(12.0));
  CHECK(aggregator_stage_cost(spec, 5.0, 0.0, 5.0) == 0.0);
  CHECK(aggregator_stage_cost(spec, 5.0, 0.0, 0.0) == doctest::Approx(1000.0));
}

TEST_CASE("storage transition clamps and snaps") {
  AggregatorSpec spec;
  spec.demand.levels = {{1.0, 3.0, 4.0}, {1.0, 3.0, 4.0}};
  spec.demand.probabilities = {{0.25, 0.5, 0.25}, {0.25, 0.5, 0.25}};
  spec.storage_levels = uniform_grid(25.0, 1.0);
  spec.action_levels = uniform_grid(10.0, 1.0);
  const AggregatorModel model(spec);
  const AggregatorState s1{0, 2, 2};  // d = 4, e = 2
  const AggregatorState n1 = model.storage_transition(s1, 5.0, 1);
  CHECK(model.storage_mw(n1) == 3.0);
  CHECK(n1.hour == 1);
  CHECK(n1.demand_level == 1);
  CHECK(model.storage_mw(model.storage_transition({0, 0, 24}, 5.0, 0)) == 25.0);
  CHECK(model.storage_mw(model.storage_transition({1, 1, 0}, 0.0, 0)) == 0.0);
  CHECK(model.storage_transition({1, 1, 0}, 0.0, 0).hour == 0);
}

TEST_CASE("grid snapping rounds midpoints up") {
  const std::vector<double> grid{0.0, 12.5, 25.0};
  CHECK(snap_to_grid(grid, 6.25) == 1);
  CHECK(snap_to_grid(grid, 6.2) == 0);
  CHECK(snap_to_grid(grid, -3.0) == 0);
  CHECK(snap_to_grid(grid, 99.0) == 2);
}

TEST_CASE("uniform demand levels carry snapped-uniform probabilities") {
  std::vector<double> levels, probs;
  uniform_demand_levels(50.0, 5.0, 3, 1.0, levels, probs);
  CHECK(levels == std::vector<double>{45.0, 50.0, 55.0});
  CHECK(probs == std::vector<double>{0.25, 0.5, 0.25});
  uniform_demand_levels(26.0, 0.0, 3, 1.0, levels, probs);
  CHECK(levels == std::vector<double>{26.0});
  CHECK(probs == std::vector<double>{1.0});
}

TEST_CASE("generator stage costs") {
  ConventionalSpec conv;
  CHECK(conventional_cost(conv, 8.0, 10.0) == doctest::Approx(50.4));
  RenewableSpec ren;
  ren.unit_cost = 2.0;
  CHECK(renewable_cost(ren, 10.0) == doctest::Approx(20.0));
}

TEST_CASE("generator costs are convex and nondecreasing along the grid") {
  const ConventionalSpec conv = small_conventional(1);
  const auto& grid = conv.output_levels;
  for (double prev : grid) {
    for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
      const double d2 = conventional_cost(conv, prev, grid[k + 1]) - 2.0 * conventional_cost(conv, prev, grid[k]) +
                        conventional_cost(conv, prev, grid[k - 1]);
      CHECK(d2 >= -1e-9);
    }
    for (std::size_t k = 1; k < grid.size(); ++k) {
      // Generation cost without the ramp term is increasing.
      CHECK(conv.quadratic * grid[k] * grid[k] >= conv.quadratic * grid[k - 1] * grid[k - 1]);
    }
  }
  const RenewableSpec ren = small_renewable(1, 3.0);
  for (std::size_t k = 1; k + 1 < ren.output_levels.size(); ++k) {
    const double d2 = renewable_cost(ren, ren.output_levels[k + 1]) - 2.0 * renewable_cost(ren, ren.output_levels[k]) +
                      renewable_cost(ren, ren.output_levels[k - 1]);
    CHECK(d2 >= -1e-9);
    CHECK(renewable_cost(ren, ren.output_levels[k]) >= renewable_cost(ren, ren.output_levels[k - 1]));
  }
}

TEST_CASE("zero-cost generator at zero price has a zero value") {
  ConventionalSpec spec = small_conventional(2);
  spec.quadratic = 0.0;
  spec.ramp = 0.0;
  const auto result = iso_generator_solve(GeneratorModel::conventional(spec).mdp(), 0.0, 0.9, 1e-12);
  for (double v : result.value.values) CHECK(v == 0.0);
}

TEST_CASE("renewable capacity truncates the action set") {
  const GeneratorModel ren = GeneratorModel::renewable(small_renewable(1, 1.0));
  const auto& mdp = ren.mdp();
  CHECK(mdp.choice_end(ren.index(0, 0)) - mdp.choice_begin(ren.index(0, 0)) == 3);  // 0, 5, 10
  CHECK(mdp.choice_end(ren.index(0, 1)) - mdp.choice_begin(ren.index(0, 1)) == 5);
}

TEST_CASE("Bellman residual contracts monotonically across sweeps") {
  const AggregatorModel model(small_aggregator(4, 6.0));
  for (auto order : {SweepOrder::jacobi, SweepOrder::gauss_seidel}) {
    SolveOptions options;
    options.discount = 0.95;
    options.tolerance = 1e-10;
    options.order = order;
    const auto result = value_iterate(model.mdp(), PriceSchedule::constant(3.0, 4), options);
    for (std::size_t k = 1; k < result.residual_history.size(); ++k) {
      CHECK(result.residual_history[k] <= result.residual_history[k - 1] + 1e-12);
    }
    CHECK(result.residual <= 1e-10);
    CHECK(bellman_residual(model.mdp(), result.value, PriceSchedule::constant(3.0, 4), 0.95) <= 1e-10);
  }
}

TEST_CASE("stored value is achieved by the stored policy") {
  const AggregatorModel model(small_aggregator(2, 5.0));
  const auto result = value_iterate(model.mdp(), 2.0, 0.9, 1e-11);
  // The returned table is one Bellman application past the table the policy is greedy for.
  ValueTable previous = result.value;
  for (std::size_t s = 0; s < model.mdp().state_count(); ++s) {
    const std::size_t c = model.mdp().choice_begin(s) + result.policy.actions[s];
    CHECK(std::abs(q_value(model.mdp(), previous, c, 2.0, 0.9) - result.value.values[s]) <= 1e-9);
  }
}

TEST_CASE("greedy purchases are non-increasing in the price") {
  std::mt19937_64 rng(5);
  const AggregatorModel model(small_aggregator(2, 6.0));
  const auto base = value_iterate(model.mdp(), 2.0, 0.9, 1e-10);
  std::uniform_real_distribution<double> price(0.0, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    double y1 = price(rng), y2 = price(rng);
    if (y1 > y2) std::swap(y1, y2);
    for (std::size_t s = 0; s < model.mdp().state_count(); ++s) {
      const double a1 = model.mdp().amount(greedy_choice(model.mdp(), base.value, s, y1, 0.9));
      const double a2 = model.mdp().amount(greedy_choice(model.mdp(), base.value, s, y2, 0.9));
      CHECK(a2 <= a1);
    }
  }
}

TEST_CASE("multi-atom schedules average the per-price minima") {
  const EntityMdp mdp = two_by_two();
  SolveOptions options;
  options.discount = 0.8;
  options.tolerance = 1e-13;
  const PriceSchedule schedule({{PriceAtom{0.5, 0.25}, PriceAtom{3.0, 0.75}}});
  const auto result = value_iterate(mdp, schedule, options);
  // Direct evaluation of the averaged operator at the fixed point.
  for (std::size_t s = 0; s < 2; ++s) {
    double expected = 0.0;
    for (const auto& atom : schedule.atoms(0)) {
      double best = 1e300;
      for (std::size_t c = mdp.choice_begin(s); c < mdp.choice_end(s); ++c) {
        best = std::min(best, q_value(mdp, result.value, c, atom.price, 0.8));
      }
      expected += atom.weight * best;
    }
    CHECK(result.value.values[s] == doctest::Approx(expected).epsilon(1e-11));
  }
  // A one-atom schedule equals the fixed-price solve.
  const auto one = value_iterate(mdp, PriceSchedule({{PriceAtom{1.5, 1.0}}}), options);
  const auto fixed = value_iterate(mdp, 1.5, 0.8, 1e-13);
  CHECK(one.value.values[0] == doctest::Approx(fixed.value.values[0]).epsilon(1e-12));
}

TEST_CASE("price atoms merge at the quantisation resolution") {
  const auto merged = PriceSchedule::merge({{1.004, 0.25}, {0.996, 0.25}, {2.0, 0.5}}, 0.01);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].price == doctest::Approx(1.0));
  CHECK(merged[0].weight == doctest::Approx(0.5));
}

TEST_CASE("uncoupled joint solve equals the sum of separate solves") {
  AggregatorSpec spec;
  spec.demand.levels = {{1.0, 2.0}};
  spec.demand.probabilities = {{0.5, 0.5}};
  spec.storage_levels = {0.0, 1.0};
  spec.action_levels = {0.0, 1.0, 2.0, 3.0};
  spec.penalty = 50.0;
  const AggregatorModel agg(spec);
  ConventionalSpec gspec;
  gspec.output_levels = {0.0, 5.0};
  gspec.clock_count = 1;
  const GeneratorModel gen = GeneratorModel::conventional(gspec);
  REQUIRE(agg.mdp().state_count() == 4);
  SolveOptions options;
  options.discount = 0.9;
  options.tolerance = 1e-12;
  JointProblem problem;
  problem.components = {&gen.mdp(), &agg.mdp()};
  const auto joint = centralized_solve(problem, options);
  const auto va = value_iterate(agg.mdp(), 0.0, 0.9, 1e-12);
  const auto vg = value_iterate(gen.mdp(), 0.0, 0.9, 1e-12);
  double worst = 0.0;
  for (std::size_t j = 0; j < joint.index.size(); ++j) {
    const auto states = joint.index.decode(j);
    worst = std::max(worst, std::abs(joint.value[j] - vg.value.values[states[0]] - va.value.values[states[1]]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("a coupling that admits one joint action fixes the policy") {
  const EntityMdp a = two_by_two();
  const EntityMdp b = two_by_two();
  JointProblem problem;
  problem.components = {&a, &b};
  problem.coupling_cost = [&](std::span<const std::size_t> states, std::span<const std::size_t> choices) {
    const bool allowed = a.local_action(states[0], choices[0]) == 1 && b.local_action(states[1], choices[1]) == 0;
    return allowed ? 0.0 : std::numeric_limits<double>::infinity();
  };
  SolveOptions options;
  options.discount = 0.9;
  const auto sol = centralized_solve(problem, options);
  for (std::size_t j = 0; j < sol.index.size(); ++j) {
    const auto states = sol.index.decode(j);
    const auto choices = sol.choices(j);
    CHECK(a.local_action(states[0], choices[0]) == 1);
    CHECK(b.local_action(states[1], choices[1]) == 0);
  }
}

TEST_CASE("joint solve refuses state spaces above the limit") {
  const AggregatorModel agg(small_aggregator(2, 10.0));
  JointProblem problem;
  problem.components = {&agg.mdp(), &agg.mdp(), &agg.mdp()};
  problem.state_limit = 1000;
  SolveOptions options;
  try {
    centralized_solve(problem, options);
    FAIL("expected refusal");
  } catch (const IntractableError& e) {
    CHECK(e.state_count == joint_state_count(problem.components));
    CHECK(e.state_count > 1000);
  }
}

TEST_CASE("joint clocked index round-trips") {
  const AggregatorModel agg(small_aggregator(3, 2.0));
  const GeneratorModel gen = GeneratorModel::conventional(small_conventional(3));
  const JointIndex index({&gen.mdp(), &agg.mdp()});
  CHECK(index.size() == 3 * 5 * 9);
  for (std::size_t j = 0; j < index.size(); ++j) {
    const auto states = index.decode(j);
    CHECK(index.encode(states) == j);
  }
}

TEST_CASE("two-generator ISO: joint solve equals the sum of per-generator solves") {
  const GeneratorModel g1 = GeneratorModel::conventional(small_conventional(2));
  const GeneratorModel g2 = GeneratorModel::renewable(small_renewable(2, 2.0));
  const double y1 = -6.0, y2 = -4.0;
  JointProblem problem;
  problem.components = {&g1.mdp(), &g2.mdp()};
  problem.coupling_cost = [&](std::span<const std::size_t>, std::span<const std::size_t> c) {
    return y1 * g1.mdp().amount(c[0]) + y2 * g2.mdp().amount(c[1]);
  };
  SolveOptions options;
  options.discount = 0.9;
  options.tolerance = 1e-12;
  const auto joint = centralized_solve(problem, options);
  const auto v1 = iso_generator_solve(g1.mdp(), y1, 0.9, 1e-12);
  const auto v2 = iso_generator_solve(g2.mdp(), y2, 0.9, 1e-12);
  double worst = 0.0;
  for (std::size_t j = 0; j < joint.index.size(); ++j) {
    const auto s = joint.index.decode(j);
    worst = std::max(worst, std::abs(joint.value[j] - v1.value.values[s[0]] - v2.value.values[s[1]]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("table dump lists every state") {
  const auto mdp = two_by_two();
  const auto result = value_iterate(mdp, 1.0, 0.5, 1e-12);
  const std::string csv = table_csv(mdp, result.value, result.policy);
  CHECK(csv.rfind("s,value,action,amount\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
