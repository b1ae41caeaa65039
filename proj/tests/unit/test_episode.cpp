#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fdsm/errors.hpp"
#include "fdsm/sim/episode.hpp"
#include "toy_systems.hpp"

using namespace fdsm;
using namespace fdsm::test;

namespace {

std::string trace_text(const EpisodeTrace& t) {
  std::ostringstream out;
  write_trace_csv(out, t);
  return out.str();
}

struct Solved {
  DsmSystem system;
  Coordinator proposed;
  Coordinator mumdp;
  CentralizedPlanner planner;

  explicit Solved(const ScenarioSpec& spec, double discount = 0.9)
      : system(build_system(spec)),
        proposed(system, options(discount, false)),
        mumdp(system, options(discount, true)),
        planner(system) {
    proposed.run_exact();
    mumdp.run_exact();
    SolveOptions so;
    so.discount = discount;
    so.tolerance = 1e-9;
    planner.solve(so);
  }

  static CoordinatorOptions options(double discount, bool single) {
    CoordinatorOptions o;
    o.discount = discount;
    o.max_iterations = 300;
    o.single_multiplier = single;
    return o;
  }

  StrategySet set() const { return {&proposed, &mumdp, &planner, DriftForm::with_demand}; }
};

}  // namespace

TEST_CASE("discounted totals") {
  CHECK(discounted_total({1.0, 2.0}, 0.5) == doctest::Approx(1.0));
  CHECK(discounted_total({3.0, 7.0, 9.0}, 0.0) == 3.0);
  CHECK(discounted_total(std::vector<double>(5000, 4.0), 0.99) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK_THROWS_AS(discounted_total({1.0}, 1.0), DomainError);
}

TEST_CASE("demand samples stay inside the hourly interval") {
  const DemandProcess demand(DemandSpec{}, 24, 3);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 500; ++k) {
    const double peak = demand.sample_mw(0, 18, rng);
    CHECK(peak >= 45.0);
    CHECK(peak <= 55.0);
    const double off = demand.sample_mw(2, 3, rng);
    CHECK(off >= 24.0);
    CHECK(off <= 28.0);
  }
  DemandSpec flat;
  flat.offpeak_range = 0.0;
  flat.quantum = 0.0;
  const DemandProcess still(flat, 24, 2);
  CHECK(still.sample_mw(1, 4, rng) == 25.5);
}

TEST_CASE("degenerate zero-cost system has zero total cost") {
  ScenarioSpec spec = toy_spec();
  spec.demand.offpeak_mean = 0.0;
  spec.demand.offpeak_range = 0.0;
  spec.storage_cost = 0.0;
  spec.penalty = 0.0;
  spec.quadratic = 0.0;
  const DsmSystem sys = build_system(spec);
  EpisodeOptions opts;
  opts.strategy = StrategyKind::myopic;
  opts.horizon = 1;
  const EpisodeTrace t = run_episode(sys, {}, opts);
  REQUIRE(t.periods.size() == 1);
  CHECK(t.periods[0].total_cost() == 0.0);
  CHECK(cost_report(sys, t, 0.99).total == 0.0);
}

TEST_CASE("episodes are reproducible, audited and consistent across strategies") {
  ScenarioSpec spec = toy_spec();
  spec.degrade_lines = true;
  spec.default_line_capacity = 5.0;
  const Solved solved(spec);
  for (StrategyKind kind : all_strategies()) {
    CAPTURE(strategy_name(kind));
    EpisodeOptions opts;
    opts.strategy = kind;
    opts.horizon = 300;
    opts.seed = 42;
    const EpisodeTrace a = run_episode(solved.system, solved.set(), opts);
    const EpisodeTrace b = run_episode(solved.system, solved.set(), opts);
    CHECK(trace_text(a) == trace_text(b));
    CHECK(audit_trace(solved.system, a) <= 1e-9);
    const CostReport r = cost_report(solved.system, a, 0.99);
    CHECK(r.normalized == doctest::Approx(r.total / 3.0 / 300.0));
    CHECK(r.discounted == doctest::Approx(discounted_total(a, 0.99)));
    double sum = 0.0;
    for (double c : r.aggregator_average) sum += c * 300.0;
    for (const auto& p : a.periods) {
      for (double c : p.generator_costs) sum += c;
    }
    CHECK(sum == doctest::Approx(r.total));
    for (const auto& p : a.periods) {
      // Delivered energy always respects the network.
      for (double f : p.constraint_values) CHECK(f <= 1e-6);
    }
    opts.seed = 43;
    CHECK(trace_text(run_episode(solved.system, solved.set(), opts)) != trace_text(a));
  }
}

TEST_CASE("episode preconditions") {
  const DsmSystem sys = build_system(toy_spec());
  EpisodeOptions opts;
  opts.horizon = 0;
  CHECK_THROWS_AS(run_episode(sys, {}, opts), DomainError);
  opts.horizon = 5;
  opts.strategy = StrategyKind::proposed;
  CHECK_THROWS_AS(run_episode(sys, {}, opts), ModelError);
  Coordinator unsolved(sys, {});
  CHECK_THROWS_AS(run_episode(sys, {&unsolved}, opts), ModelError);
}

TEST_CASE("unservable demand sheds load and pays the aggregator penalty") {
  ScenarioSpec spec = toy_spec();
  spec.conventional_max = 2.0;
  spec.demand.offpeak_mean = 4.0;
  spec.demand.offpeak_range = 0.0;
  spec.storage_capacity = {0.0};
  const DsmSystem sys = build_system(spec);
  EpisodeOptions opts;
  opts.strategy = StrategyKind::myopic;
  opts.horizon = 3;
  const EpisodeTrace t = run_episode(sys, {}, opts);
  for (const auto& p : t.periods) {
    CHECK(p.safeguard);
    CHECK(p.delivered[0] + p.delivered[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(p.generation[0] == doctest::Approx(2.0).epsilon(1e-6));
  }
  CHECK(t.flagged_periods() == 3);
  CHECK(audit_trace(sys, t) <= 1e-9);
}

TEST_CASE("expected LMP of a single quadratic generator is its marginal cost") {
  const DsmSystem sys = build_system(toy_spec());
  EpisodeTrace t;
  PeriodRecord p;
  p.purchases = {4.0, 6.0};
  p.previous_output = {0.0};
  p.max_output = {20.0};
  p.prices = {12.0, 11.0};
  t.periods.push_back(p);
  const LmpEstimate e = estimate_lmp(sys, t, 0.01);
  CHECK(e.used == 1);
  CHECK(e.expected_lmp[0] == doctest::Approx(10.005).epsilon(1e-4));
  CHECK(e.expected_lmp[1] == doctest::Approx(10.005).epsilon(1e-4));
  CHECK(e.conjectured[0] == 12.0);

  p.purchases = {12.0, 12.0};  // above the 20 MW limit: skipped
  t.periods.push_back(p);
  const LmpEstimate skipped = estimate_lmp(sys, t, 0.01);
  CHECK(skipped.used == 1);
  CHECK(skipped.skipped == 1);
}

TEST_CASE("a single shared multiplier does not beat per-state multipliers") {
  // Derated lines bind differently per ISO state.
  ScenarioSpec spec = toy_spec();
  spec.degrade_lines = true;
  spec.default_line_capacity = 4.0;
  spec.degrade_factor = 0.25;
  const Solved solved(spec);
  double proposed = 0.0, shared = 0.0;
  std::vector<double> diff;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EpisodeOptions opts;
    opts.horizon = 500;
    opts.seed = seed;
    opts.strategy = StrategyKind::proposed;
    const double a = cost_report(solved.system, run_episode(solved.system, solved.set(), opts), 0.9).normalized;
    opts.strategy = StrategyKind::mumdp;
    const double b = cost_report(solved.system, run_episode(solved.system, solved.set(), opts), 0.9).normalized;
    proposed += a;
    shared += b;
    diff.push_back(b - a);
  }
  double mean = 0.0, var = 0.0;
  for (double d : diff) mean += d / 10.0;
  for (double d : diff) var += (d - mean) * (d - mean) / 9.0;
  CHECK(mean >= -2.0 * std::sqrt(var / 10.0));
  CHECK(proposed < shared);
}

TEST_CASE("online rounds keep multipliers non-negative and deterministic") {
  ScenarioSpec spec = toy_spec();
  spec.degrade_lines = true;
  spec.default_line_capacity = 5.0;
  const DsmSystem sys = build_system(spec);
  auto run = [&]() {
    Coordinator c(sys, {});
    const auto d = train_online(c, 200, 7, 20);
    std::vector<double> out;
    for (const auto& r : d) {
      CHECK((r.lambda.array() >= 0.0).all());
      out.push_back(r.lambda.sum());
    }
    return out;
  };
  CHECK(run() == run());
}
