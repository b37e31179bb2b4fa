#include <doctest.h>

#include <vector>

#include "ctms/error.hpp"
#include "ctms/ga.hpp"
#include "ctms/metrics.hpp"
#include "test_support.hpp"

using namespace ctms;
using namespace ctms::testing;

TEST_CASE("step delay is the extra traversal time over free flow") {
  const StretchParams stretch({make_cell(1.0, 100.0), make_cell(0.5, 100.0)});
  const std::vector<double> speeds{50.0, 100.0};
  CHECK(step_delay(speeds, stretch) == doctest::Approx(1.0 / 50.0 - 1.0 / 100.0).epsilon(1e-14));
  const std::vector<double> free{100.0, 100.0};
  CHECK(step_delay(free, stretch) == 0.0);
  CHECK_THROWS_AS(step_delay(std::vector<double>{100.0}, stretch), DomainError);
}

TEST_CASE("delay series of free-flow and empty trajectories is zero") {
  const auto stretch = uniform_stretch(5);
  const auto empty = simulate(stretch, std::nullopt, FixedParams{}, constant_profile(500, 0.0));
  for (double d : delay_series(empty, stretch)) CHECK(d == 0.0);
  const auto light = simulate(stretch, std::nullopt, FixedParams{}, constant_profile(500, 800.0));
  for (double d : delay_series(light, stretch)) CHECK(d == 0.0);
}

TEST_CASE("xi integrates the delay series in minutes") {
  CHECK(xi_delta(std::vector<double>(50, 0.0), 0.0025) == 0.0);
  CHECK(xi_delta(std::vector<double>(100, 0.01), 0.0025) == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("xi is monotone in the pointwise delay") {
  Rng rng(3);
  std::vector<double> a(200), b(200);
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = rng.uniform(0.0, 0.1);
    b[k] = a[k] + rng.uniform(0.0, 0.01);
  }
  CHECK(xi_delta(a, 0.0025) <= xi_delta(b, 0.0025));
}

TEST_CASE("peak reduction index") {
  const std::vector<double> base{0.0, 2.0, 1.0};
  CHECK(pi_delta(base, base).value == 0.0);
  CHECK(pi_delta(std::vector<double>(3, 0.0), base).value == 1.0);
  CHECK(pi_delta(std::vector<double>{0.0, 3.0, 0.0}, base).value == doctest::Approx(-0.5));
  const auto flat = pi_delta(std::vector<double>(3, 0.0), std::vector<double>(3, 0.0));
  CHECK(flat.value == 0.0);
  CHECK(flat.no_baseline_congestion);
  CHECK_THROWS_AS(pi_delta(std::vector<double>(2, 0.0), base), DomainError);
}

TEST_CASE("peak reduction is invariant under a common rescaling") {
  const std::vector<double> base{0.1, 0.7, 0.3}, with{0.2, 0.4, 0.1};
  std::vector<double> base3, with3;
  for (double x : base) base3.push_back(3.5 * x);
  for (double x : with) with3.push_back(3.5 * x);
  CHECK(pi_delta(with3, base3).value == doctest::Approx(pi_delta(with, base).value).epsilon(1e-14));
}

TEST_CASE("design cost is alpha xi minus pi") {
  CHECK(design_cost(0.0, 0.0, 0.01) == 0.0);
  CHECK(design_cost(271.3, 0.12, 0.01) == doctest::Approx(2.593).epsilon(1e-12));
  CHECK(design_cost(101.1, 0.31, 0.01) == doctest::Approx(0.701).epsilon(1e-12));
  // affine in (xi, pi)
  const double c1 = design_cost(10.0, 0.2, 0.01), c2 = design_cost(30.0, 0.5, 0.01);
  CHECK(design_cost(20.0, 0.35, 0.01) == doctest::Approx(0.5 * (c1 + c2)).epsilon(1e-14));
}

TEST_CASE("relative congestion index alpha uses the free-flow time in minutes") {
  const StretchParams stretch({make_cell(1.0, 100.0), make_cell(2.0, 100.0)});
  CHECK(rci_alpha(stretch) == doctest::Approx(1.0 / 1.8).epsilon(1e-14));
}

TEST_CASE("evaluator: station off gives the baseline, zero demand gives zero") {
  std::vector<CellParams> cells(6, make_cell(0.5));
  cells[4].capacity = 1200.0;  // bottleneck
  const StretchParams stretch(cells);
  const auto profile = constant_profile(2000, 1600.0);
  const CostEvaluator evaluator(stretch, FixedParams{}, profile, 0.01);
  CHECK(evaluator.baseline_xi() > 0.0);
  const StationDesign off{1, 3, 40.0, 0.0};
  const auto s = evaluator.score(off);
  CHECK(s.xi_delta_min == evaluator.baseline_xi());
  CHECK(s.pi_delta == 0.0);
  CHECK(evaluate_fitness(off, evaluator) == -0.01 * evaluator.baseline_xi());

  const CostEvaluator idle(stretch, FixedParams{}, constant_profile(500, 0.0), 0.01);
  for (int i = 1; i <= 4; ++i) CHECK(evaluate_fitness({i, i + 2, 60.0, 0.2}, idle) == 0.0);
  CHECK(idle.report(StationDesign{1, 3, 60.0, 0.2}).no_baseline_congestion);
}

TEST_CASE("evaluator report agrees with the trajectory pipeline") {
  std::vector<CellParams> cells(6, make_cell(0.5));
  cells[4].capacity = 1300.0;
  const StretchParams stretch(cells);
  DemandProfile profile = constant_profile(3000, 0.0);
  for (std::size_t k = 0; k < 3000; ++k) profile.mainstream_inflow[k] = k < 1500 ? 1700.0 : 300.0;
  const StationDesign design{2, 4, 30.0, 0.15};
  const CostEvaluator evaluator(stretch, FixedParams{}, profile, 0.01);
  const auto report = evaluator.report(design);

  const auto base = delay_series(simulate(stretch, std::nullopt, FixedParams{}, profile), stretch);
  const auto with = delay_series(simulate(stretch, design, FixedParams{}, profile), stretch);
  const double xi = xi_delta(with, profile.step_hours);
  const double pi = pi_delta(with, base).value;
  CHECK(report.delay_series == with);
  CHECK(report.xi_delta_min == xi);
  CHECK(report.pi_delta == pi);
  CHECK(report.cost == design_cost(xi, pi, 0.01));
  CHECK(evaluator.score(design) == report.score());
  CHECK(simulate_delay(stretch, design, FixedParams{}, profile) == with);
}

TEST_CASE("score CSV layout") {
  CHECK(score_csv_header() == "i,j,delta_min,beta_s,xi_delta_min,pi_delta,cost");
  CHECK(score_csv_row({4, 6, 95.0, 0.19}, {101.1, 0.31, 0.701}) == "4,6,95,0.19,101.1,0.31,0.701");
}
