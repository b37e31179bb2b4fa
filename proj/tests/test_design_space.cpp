#include <doctest.h>

#include <cmath>

#include "ctms/design_space.hpp"
#include "ctms/error.hpp"
#include "test_support.hpp"

using namespace ctms;
using namespace ctms::testing;

namespace {
DesignBounds span2() { return DesignBounds::defaults(FixedParams{}); }
}  // namespace

TEST_CASE("feasibility checks span, boxes and exclusions") {
  const auto stretch = uniform_stretch(15);
  const auto bounds = span2();
  CHECK(is_feasible({4, 6, 95.0, 0.19}, bounds, stretch));
  CHECK_FALSE(is_feasible({4, 7, 95.0, 0.19}, bounds, stretch));
  CHECK_FALSE(is_feasible({4, 6, 95.0, 0.25}, bounds, stretch));
  CHECK_FALSE(is_feasible({4, 6, 800.0, 0.1}, bounds, stretch));
  CHECK_FALSE(is_feasible({14, 16, 95.0, 0.1}, bounds, stretch));
  auto excluded = bounds;
  excluded.excluded_cells = {4, 5, 6};
  CHECK_FALSE(is_feasible({4, 6, 95.0, 0.19}, excluded, stretch));
  CHECK_FALSE(is_feasible({2, 4, 95.0, 0.19}, excluded, stretch));
  CHECK(is_feasible({7, 9, 100.0, 0.19}, excluded, stretch));
}

TEST_CASE("station ratio is limited by the access cell's off-ramp") {
  std::vector<CellParams> cells(6, make_cell(0.5));
  cells[2].offramp_ratio = 0.9;
  const StretchParams stretch(cells);
  const auto bounds = span2();
  CHECK(max_station_ratio(bounds, stretch, 3) == doctest::Approx(0.1));
  CHECK_FALSE(is_feasible({3, 5, 10.0, 0.15}, bounds, stretch));
  CHECK(is_feasible({3, 5, 10.0, 0.1}, bounds, stretch));
}

TEST_CASE("admissible access cells follow span, N and exclusions") {
  const auto stretch = uniform_stretch(10);
  auto bounds = span2();
  CHECK(admissible_access_cells(bounds, stretch) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
  bounds.excluded_cells = {4, 5, 6};
  CHECK(admissible_access_cells(bounds, stretch) == std::vector<int>{1, 7, 8});
  bounds.access_cells = {2, 7};
  CHECK(admissible_access_cells(bounds, stretch) == std::vector<int>{7});
}

TEST_CASE("uniform sampling") {
  const auto stretch = uniform_stretch(10);
  const auto bounds = span2();
  SUBCASE("access in 1..8 with exit forced by the span") {
    Rng rng(1);
    for (int k = 0; k < 2000; ++k) {
      const auto d = sample_uniform(bounds, stretch, rng);
      CHECK(d.access_cell >= 1);
      CHECK(d.access_cell <= 8);
      CHECK(d.exit_cell == d.access_cell + 2);
      CHECK(is_feasible(d, bounds, stretch));
    }
  }
  SUBCASE("deterministic for a seed") {
    CHECK(sample_uniform(bounds, stretch, 99) == sample_uniform(bounds, stretch, 99));
  }
  SUBCASE("station ratio mean matches the uniform law") {
    Rng rng(2);
    const int n = 10000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += sample_uniform(bounds, stretch, rng).station_ratio;
    const double sigma = 0.2 / std::sqrt(12.0) / std::sqrt(double(n));
    CHECK(std::abs(sum / n - 0.1) <= 3.0 * sigma);
  }
  SUBCASE("empty feasible set") {
    auto none = bounds;
    none.excluded_cells = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK_THROWS_AS(sample_uniform(none, stretch, 1), ConfigError);
  }
}

TEST_CASE("projection examples") {
  const auto stretch = uniform_stretch(15);
  auto bounds = span2();
  CHECK(project({4.4, 6.1, 95.0, 0.19}, bounds, stretch) == StationDesign{4, 6, 95.0, 0.19});
  CHECK(project({-3.0, 42.0, 10000.0, 0.9}, bounds, stretch) == StationDesign{1, 3, 720.0, 0.2});
  CHECK(project({4.5, 0.0, -5.0, -1.0}, bounds, stretch) == StationDesign{4, 6, 0.0, 0.0});  // tie → lower
  bounds.excluded_cells = {4, 5, 6};
  // barred access cells are {2..6}: 5 is 2 away from 7 and 3 away from 1
  CHECK(project({5.0, 7.0, 80.0, 0.10}, bounds, stretch) == StationDesign{7, 9, 80.0, 0.10});
  CHECK_THROWS_AS(project({std::nan(""), 0.0, 0.0, 0.0}, bounds, stretch), DomainError);
}

TEST_CASE("projection is feasible and idempotent") {
  const auto stretch = uniform_stretch(12);
  auto bounds = span2();
  bounds.excluded_cells = {3, 8};
  Rng rng(8);
  for (int k = 0; k < 3000; ++k) {
    const std::array<double, 4> raw{rng.uniform(-5.0, 20.0), rng.uniform(-5.0, 20.0), rng.uniform(-100.0, 900.0),
                                    rng.uniform(-0.3, 0.6)};
    const auto p = project(raw, bounds, stretch);
    CHECK(is_feasible(p, bounds, stretch));
    CHECK(project(to_genes(p), bounds, stretch) == p);
  }
}

TEST_CASE("bounds validation") {
  const auto stretch = uniform_stretch(5);
  auto bounds = span2();
  CHECK_NOTHROW(bounds.validate(stretch));
  bounds.min_service_minutes = 800.0;
  CHECK_THROWS_AS(bounds.validate(stretch), ConfigError);
  bounds = span2();
  bounds.span = 5;
  CHECK_THROWS_AS(bounds.validate(stretch), ConfigError);
}
