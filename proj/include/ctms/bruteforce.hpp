#pragma once

#include <iosfwd>
#include <vector>

#include "ctms/design_space.hpp"
#include "ctms/metrics.hpp"

namespace ctms {

/// Lattice resolution of the exhaustive search; the cell step is always 1.
struct GridSpec {
  double delta_step_min = 5.0;
  double ratio_step = 0.01;
};

/// Grid over admissible access cells × δ lattice × βˢ lattice, row-major in
/// (i, δ, βˢ). βˢ values above the per-cell limit 1 − β_i are clamped and
/// duplicates dropped.
std::vector<StationDesign> enumerate_grid(const DesignBounds& bounds, const StretchParams& stretch,
                                          const GridSpec& grid);

struct GridEvaluation {
  StationDesign design;
  DesignScore score;
};

struct SearchResult {
  StationDesign best;
  double best_cost = 0.0;
  std::vector<GridEvaluation> table;  ///< every grid point, enumeration order
};

/// Scores every grid point and returns the minimum; ties resolve to the
/// first point in enumeration order, i.e. lexicographically on (i, δ, βˢ).
SearchResult brute_force_search(const CostEvaluator& evaluator, const DesignBounds& bounds, const GridSpec& grid,
                                int jobs = 1);

/// CSV with header i,j,delta_min,beta_s,xi,pi,cost.
void write_cost_table(std::ostream& out, const SearchResult& result);

}  // namespace ctms
