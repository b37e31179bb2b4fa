#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ctms/bruteforce.hpp"
#include "ctms/error.hpp"
#include "ctms/ga.hpp"
#include "test_support.hpp"

using namespace ctms;
using namespace ctms::testing;

namespace {

/// Six cells with a bottleneck at cell 5 and a rush-hour pulse.
struct Bottleneck {
  StretchParams stretch;
  DemandProfile profile;
  Bottleneck() {
    std::vector<CellParams> cells(6, make_cell(0.5));
    cells[4].capacity = 1300.0;
    stretch = StretchParams(cells);
    profile = constant_profile(2400, 300.0);
    for (std::size_t k = 400; k < 1000; ++k) profile.mainstream_inflow[k] = 1800.0;
  }
};

}  // namespace

TEST_CASE("double-point crossover") {
  const auto stretch = uniform_stretch(15);
  const auto bounds = DesignBounds::defaults(FixedParams{});
  const StationDesign a{4, 6, 95.0, 0.19}, b{11, 13, 80.0, 0.10};
  CHECK(crossover_double_point(a, a, 1, 3, bounds, stretch) == a);
  CHECK(crossover_double_point(a, b, 0, 4, bounds, stretch) == b);
  const auto raw = crossover_genes(a, b, 1, 3);
  CHECK(raw == std::array<double, 4>{4.0, 13.0, 80.0, 0.19});
  CHECK(crossover_double_point(a, b, 1, 3, bounds, stretch) == StationDesign{4, 6, 80.0, 0.19});
  CHECK_THROWS_AS(crossover_genes(a, b, 3, 1), DomainError);
  Rng rng(4);
  for (int k = 0; k < 200; ++k) CHECK(is_feasible(crossover_double_point(a, b, bounds, stretch, rng), bounds, stretch));
}

TEST_CASE("mutation") {
  const auto stretch = uniform_stretch(10);
  const auto bounds = DesignBounds::defaults(FixedParams{});
  const StationDesign d{3, 5, 100.0, 0.05};
  SUBCASE("probability zero is the identity") {
    Rng rng(1);
    for (int k = 0; k < 100; ++k) CHECK(mutate(d, bounds, stretch, 0.0, rng) == d);
  }
  SUBCASE("fixed seed gives a reproducible mutant") {
    Rng r1(5), r2(5);
    CHECK(mutate(d, bounds, stretch, 0.5, r1) == mutate(d, bounds, stretch, 0.5, r2));
  }
  SUBCASE("probability one matches uniform sampling in distribution") {
    Rng rm(6), rs(7);
    const int n = 10000;
    double mi = 0, md = 0, mb = 0, si = 0, sd = 0, sb = 0;
    for (int k = 0; k < n; ++k) {
      const auto m = mutate(d, bounds, stretch, 1.0, rm);
      const auto s = sample_uniform(bounds, stretch, rs);
      CHECK(is_feasible(m, bounds, stretch));
      mi += m.access_cell, md += m.service_minutes, mb += m.station_ratio;
      si += s.access_cell, sd += s.service_minutes, sb += s.station_ratio;
    }
    // two-sample mean comparison, 4σ of the difference of means
    const auto tol = [n](double sd_one) { return 4.0 * sd_one * std::sqrt(2.0 / n); };
    CHECK(std::abs(mi - si) / n <= tol(std::sqrt((64.0 - 1.0) / 12.0)));
    CHECK(std::abs(md - sd) / n <= tol(720.0 / std::sqrt(12.0)));
    CHECK(std::abs(mb - sb) / n <= tol(0.2 / std::sqrt(12.0)));
  }
}

TEST_CASE("GA config validation") {
  GAConfig c;
  CHECK_NOTHROW(c.validate());
  c.elite_count = 20;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GAConfig{};
  c.mutation_prob = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GAConfig{};
  c.stagnation_limit = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("a single feasible design is returned after K_stop + 1 generations") {
  const Bottleneck b;
  const CostEvaluator evaluator(b.stretch, FixedParams{}, b.profile, 0.01);
  auto bounds = DesignBounds::defaults(FixedParams{});
  bounds.access_cells = {2};
  bounds.min_service_minutes = bounds.max_service_minutes = 30.0;
  bounds.min_ratio = bounds.max_ratio = 0.1;
  GAConfig config;
  config.seed = 3;
  const auto run = run_ga(evaluator, bounds, config);
  CHECK(run.best_design == StationDesign{2, 4, 30.0, 0.1});
  CHECK(run.generations_run == config.stagnation_limit + 1);
  CHECK(run.stopped_on_stagnation);
  CHECK(run.evaluations_count == 1);
}

TEST_CASE("GA run invariants") {
  const Bottleneck b;
  const CostEvaluator evaluator(b.stretch, FixedParams{}, b.profile, 0.01);
  const auto bounds = DesignBounds::defaults(FixedParams{});
  GAConfig config;
  config.seed = 11;
  const auto run = run_ga(evaluator, bounds, config);
  REQUIRE(run.fitness_history.size() == static_cast<std::size_t>(run.generations_run));
  for (std::size_t g = 1; g < run.fitness_history.size(); ++g)
    CHECK(run.fitness_history[g] >= run.fitness_history[g - 1]);
  CHECK(run.best_cost == -run.fitness_history.back());
  CHECK(run.best_cost == evaluator.score(run.best_design).cost);
  CHECK(is_feasible(run.best_design, bounds, b.stretch));
  CHECK(run.generations_run <= config.max_generations);

  SUBCASE("deterministic for a seed, independent of jobs") {
    GAConfig parallel = config;
    parallel.jobs = 3;
    const auto again = run_ga(evaluator, bounds, parallel);
    CHECK(again.best_design == run.best_design);
    CHECK(again.fitness_history == run.fitness_history);
    CHECK(again.evaluations_count == run.evaluations_count);
  }
  SUBCASE("generation log") {
    std::ostringstream out;
    write_generation_log(out, run);
    const auto text = out.str();
    CHECK(text.rfind("generation,best_fitness,mean_fitness,i,j,delta_min,beta_s\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == run.generations_run + 1);
  }
}

TEST_CASE("seeding with a design bounds the result by its cost") {
  const Bottleneck b;
  const CostEvaluator evaluator(b.stretch, FixedParams{}, b.profile, 0.01);
  const auto bounds = DesignBounds::defaults(FixedParams{});
  const auto oracle = brute_force_search(evaluator, bounds, GridSpec{120.0, 0.05});
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    GAConfig config;
    config.seed = seed;
    config.seed_designs = {oracle.best};
    const auto run = run_ga(evaluator, bounds, config);
    CHECK(run.best_cost <= oracle.best_cost);
  }
}

TEST_CASE("penalty policy keeps the population feasible-or-penalized") {
  const Bottleneck b;
  const CostEvaluator evaluator(b.stretch, FixedParams{}, b.profile, 0.01);
  auto bounds = DesignBounds::defaults(FixedParams{});
  bounds.excluded_cells = {3};
  GAConfig config;
  config.seed = 2;
  config.infeasible = InfeasiblePolicy::penalty;
  const auto run = run_ga(evaluator, bounds, config);
  CHECK(is_feasible(run.best_design, bounds, b.stretch));
  CHECK(run.best_cost < -kPenaltyFitness);
}

TEST_CASE("infeasible seed designs are rejected") {
  const Bottleneck b;
  const CostEvaluator evaluator(b.stretch, FixedParams{}, b.profile, 0.01);
  GAConfig config;
  config.seed_designs = {{1, 4, 10.0, 0.1}};
  CHECK_THROWS_AS(run_ga(evaluator, DesignBounds::defaults(FixedParams{}), config), ConfigError);
}
