#pragma once

#include <cmath>
#include <vector>

#include "ctms/model.hpp"
#include "ctms/rng.hpp"

namespace ctms::testing {

inline CellParams make_cell(double length_km, double free_flow = 100.0, double wave = 25.0, double capacity = 2000.0,
                            double jam = 80.0, double offramp = 0.0) {
  return {length_km, free_flow, wave, capacity, jam, offramp};
}

inline StretchParams uniform_stretch(std::size_t n, double length_km = 0.5) {
  return StretchParams(std::vector<CellParams>(n, make_cell(length_km)));
}

inline DemandProfile constant_profile(std::size_t steps, double flow, double step_hours = 0.0025) {
  DemandProfile p;
  p.step_hours = step_hours;
  p.mainstream_inflow.assign(steps, flow);
  return p;
}

/// Random stretch whose every cell satisfies the CFL bound for `step_hours`.
inline StretchParams random_test_stretch(Rng& rng, std::size_t n, double step_hours, bool with_offramps) {
  std::vector<CellParams> cells(n);
  for (auto& c : cells) {
    c.free_flow_speed = rng.uniform(80.0, 120.0);
    c.length_km = c.free_flow_speed * step_hours * rng.uniform(1.0, 3.0);
    c.wave_speed = rng.uniform(10.0, 40.0);
    c.capacity = rng.uniform(1200.0, 2500.0);
    c.jam_density = rng.uniform(60.0, 110.0);
    c.offramp_ratio = with_offramps && rng.bernoulli(0.3) ? rng.uniform(0.0, 0.3) : 0.0;
  }
  return StretchParams(std::move(cells));
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace ctms::testing
