#include "ctms/bruteforce.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "ctms/error.hpp"
#include "ctms/parallel.hpp"

namespace ctms {

namespace {

std::vector<double> lattice(double lo, double hi, double step, const char* name) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError(fmt::format("grid {} step {} must be > 0", name, step));
  const double width = hi - lo;
  if (width > 0.0 && step > width)
    throw ConfigError(fmt::format("grid {} step {} exceeds the range width {}", name, step, width));
  const auto count = static_cast<std::size_t>(std::floor(width / step + 1e-9)) + 1;
  std::vector<double> values(count);
  // Snap to 1e-9 so lattice points print as the decimals they stand for (0.15, not 0.15000000000000002).
  for (std::size_t k = 0; k < count; ++k)
    values[k] = std::min(hi, std::round((lo + static_cast<double>(k) * step) * 1e9) / 1e9);
  return values;
}

}  // namespace

std::vector<StationDesign> enumerate_grid(const DesignBounds& bounds, const StretchParams& stretch,
                                          const GridSpec& grid) {
  bounds.validate(stretch);
  const auto cells = admissible_access_cells(bounds, stretch);
  if (cells.empty()) throw ConfigError("design grid is empty: no admissible access cell");
  const auto deltas = lattice(bounds.min_service_minutes, bounds.max_service_minutes, grid.delta_step_min, "delta");
  const auto ratios = lattice(bounds.min_ratio, bounds.max_ratio, grid.ratio_step, "ratio");

  std::vector<StationDesign> out;
  out.reserve(cells.size() * deltas.size() * ratios.size());
  for (int i : cells) {
    const double ratio_cap = max_station_ratio(bounds, stretch, i);
    for (double delta : deltas) {
      double last = -1.0;
      for (double r : ratios) {
        const double ratio = std::min(r, ratio_cap);
        if (ratio == last) continue;
        last = ratio;
        out.push_back({i, i + bounds.span, delta, ratio});
      }
    }
  }
  return out;
}

SearchResult brute_force_search(const CostEvaluator& evaluator, const DesignBounds& bounds, const GridSpec& grid,
                                int jobs) {
  const auto designs = enumerate_grid(bounds, evaluator.stretch(), grid);
  SearchResult result;
  result.table.resize(designs.size());
  parallel_for(designs.size(), jobs, [&](std::size_t k) {
    try {
      result.table[k] = {designs[k], evaluator.score(designs[k])};
    } catch (const Error& e) {
      throw ConsistencyError(fmt::format("evaluating design {}: {}", to_string(designs[k]), e.what()));
    }
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < result.table.size(); ++k)
    if (result.table[k].score.cost < result.table[best].score.cost) best = k;
  result.best = result.table[best].design;
  result.best_cost = result.table[best].score.cost;
  return result;
}

void write_cost_table(std::ostream& out, const SearchResult& result) {
  out << "i,j,delta_min,beta_s,xi,pi,cost\n";
  for (const auto& row : result.table)
    out << fmt::format("{},{},{},{},{},{},{}\n", row.design.access_cell, row.design.exit_cell,
                       row.design.service_minutes, row.design.station_ratio, row.score.xi_delta_min,
                       row.score.pi_delta, row.score.cost);
}

}  // namespace ctms
