#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ctms/dataset.hpp"
#include "ctms/error.hpp"
#include "ctms/metrics.hpp"
#include "ctms/scenario.hpp"
#include "test_support.hpp"

using namespace ctms;
using namespace ctms::testing;

namespace {

GAConfig quick_ga() {
  GAConfig ga;
  ga.stagnation_limit = 3;
  ga.max_generations = 10;
  return ga;
}

DemandProfile short_profile() {
  BimodalProfileSpec spec;
  spec.horizon_h = 12.0;
  spec.morning_peak_flow = 1800.0;
  return synthesize_profile(spec, 0.0025);
}

}  // namespace

TEST_CASE("random stretches stay inside the generator ranges") {
  StretchRanges ranges;
  ranges.cells = 15;
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const auto s = random_stretch(ranges, rng);
    REQUIRE(s.size() == 15);
    for (const auto& c : s.cells()) {
      CHECK(c.length_km * 1000.0 >= 300.0 - 1e-9);
      CHECK(c.length_km * 1000.0 <= 1000.0 + 1e-9);
      CHECK(ranges.free_flow_speed.contains(c.free_flow_speed));
      CHECK(ranges.wave_speed.contains(c.wave_speed));
      CHECK(ranges.capacity.contains(c.capacity));
      CHECK(ranges.jam_density.contains(c.jam_density));
      CHECK(c.offramp_ratio == 0.0);
      CHECK(c.wave_speed < c.free_flow_speed);
    }
  }
}

TEST_CASE("random stretches are reproducible and uniform") {
  StretchRanges ranges;
  ranges.cells = 5;
  Rng a(42), b(42);
  CHECK(random_stretch(ranges, a) == random_stretch(ranges, b));

  Rng rng(7);
  const int n = 1000;
  double sum_len = 0, sum_v = 0, sum_w = 0, sum_q = 0, sum_rho = 0;
  int draws = 0;
  for (int k = 0; k < n; ++k) {
    const auto stretch = random_stretch(ranges, rng);
    for (const auto& c : stretch.cells()) {
      sum_len += c.length_km * 1000.0, sum_v += c.free_flow_speed, sum_w += c.wave_speed;
      sum_q += c.capacity, sum_rho += c.jam_density;
      ++draws;
    }
  }
  const auto within = [draws](double sum, Interval r) {
    const double sigma = (r.hi - r.lo) / std::sqrt(12.0) / std::sqrt(double(draws));
    return std::abs(sum / draws - 0.5 * (r.lo + r.hi)) <= 3.0 * sigma;
  };
  CHECK(within(sum_len, ranges.length_m));
  CHECK(within(sum_v, ranges.free_flow_speed));
  CHECK(within(sum_w, ranges.wave_speed));
  CHECK(within(sum_q, ranges.capacity));
  CHECK(within(sum_rho, ranges.jam_density));
}

TEST_CASE("range validation") {
  StretchRanges r;
  r.wave_speed = {115.0, 120.0};
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r = {};
  r.length_m = {500.0, 300.0};
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r = {};
  r.cells = 1;
  CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("a one-record corpus has a feasible target with a consistent score") {
  StretchRanges ranges;
  ranges.cells = 6;
  ranges.count = 1;
  const auto profile = short_profile();
  const auto corpus = build_corpus(ranges, quick_ga(), profile, 0.01, 5);
  REQUIRE(corpus.records.size() == 1);
  CHECK(corpus.failures == 0);
  const auto& r = corpus.records.front();
  const auto bounds = DesignBounds::defaults(r.fixed);
  CHECK(is_feasible(r.target, bounds, r.stretch));
  const CostEvaluator evaluator(r.stretch, r.fixed, profile, 0.01);
  const auto score = evaluator.score(r.target);
  CHECK(std::abs(score.cost - r.cost) <= 1e-12);
  CHECK(score.xi_delta_min == r.xi_delta_min);
  // elitism through the no-station seed
  CHECK(r.cost <= evaluator.score(no_station_design(bounds, r.stretch)).cost);
  CHECK(build_record(ranges, quick_ga(), profile, 0.01, 5, 0) == r);
}

TEST_CASE("corpus files are byte-identical for a master seed and round-trip") {
  StretchRanges ranges;
  ranges.cells = 5;
  ranges.count = 4;
  ranges.fixed_ranges = FixedRanges{};
  const auto profile = short_profile();
  const auto a = build_corpus(ranges, quick_ga(), profile, 0.01, 77, 1);
  const auto b = build_corpus(ranges, quick_ga(), profile, 0.01, 77, 2);
  std::ostringstream sa, sb;
  write_ndjson(sa, a.records);
  write_ndjson(sb, b.records);
  CHECK(sa.str() == sb.str());
  std::istringstream in(sa.str());
  CHECK(read_ndjson(in) == a.records);
  for (const auto& r : a.records) {
    CHECK(ranges.fixed_ranges->mainstream_priority.contains(r.fixed.mainstream_priority));
    CHECK(ranges.fixed_ranges->ramp_capacity.contains(r.fixed.ramp_capacity));
  }

  std::ostringstream csv;
  write_corpus_csv(csv, a.records);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == 6 * 5 + 3 + 4);
  CHECK(header.rfind("L_1,vff_1,w_1,qmax_1,rhomax_1,beta_1,", 0) == 0);
  CHECK(header.find(",p_ms,r_s_max,span,i,j,delta_min,beta_s") != std::string::npos);
}

TEST_CASE("failing records are counted and skipped") {
  StretchRanges ranges;
  ranges.cells = 4;
  ranges.count = 3;
  // a 0.001 h step is fine; a 0.02 h step violates CFL for every stretch
  const auto corpus = build_corpus(ranges, quick_ga(), constant_profile(10, 100.0, 0.02), 0.01, 1);
  CHECK(corpus.records.empty());
  CHECK(corpus.failures == 3);
}

TEST_CASE("malformed corpus lines are reported with their line number") {
  std::istringstream in("\n{\"seed\": 1}\n");
  CHECK_THROWS_WITH_AS(read_ndjson(in), doctest::Contains("line 2"), ParseError);
}
