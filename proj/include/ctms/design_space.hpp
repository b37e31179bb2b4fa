#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <vector>

#include "ctms/model.hpp"
#include "ctms/rng.hpp"

namespace ctms {

/// Feasible set of station designs: the span equality j − i = L_(i,j), box
/// bounds on δ and βˢ, admissible access cells and cells barred from being
/// access or exit.
struct DesignBounds {
  std::vector<int> access_cells;  ///< admissible access cells (1-based); empty means all
  int span = 2;
  double min_service_minutes = 0.0;
  double max_service_minutes = 720.0;
  double min_ratio = 0.0;
  double max_ratio = 0.2;
  std::set<int> excluded_cells;

  /// Defaults for a stretch: every cell, span from F, δ ∈ [0, 720] min, βˢ ∈ [0, 0.2].
  static DesignBounds defaults(const FixedParams& fixed);

  /// Throws ConfigError on empty ranges or an inconsistent span.
  void validate(const StretchParams& stretch) const;

  bool operator==(const DesignBounds&) const = default;
};

/// Access cells i with a feasible design, in ascending order.
std::vector<int> admissible_access_cells(const DesignBounds& bounds, const StretchParams& stretch);

/// Largest βˢ allowed at `access_cell`: min(max_ratio, 1 − β_i).
double max_station_ratio(const DesignBounds& bounds, const StretchParams& stretch, int access_cell);

bool is_feasible(const StationDesign& design, const DesignBounds& bounds, const StretchParams& stretch);

/// Uniform draw from the feasible set (access cell, δ and βˢ independently uniform).
StationDesign sample_uniform(const DesignBounds& bounds, const StretchParams& stretch, Rng& rng);
StationDesign sample_uniform(const DesignBounds& bounds, const StretchParams& stretch, std::uint64_t seed);

/// Maps an arbitrary (i, j, δ [min], βˢ) vector onto the feasible set: the
/// access cell snaps to the nearest admissible cell (ties to the lower
/// index), the exit follows from the span and δ, βˢ are clamped.
StationDesign project(const std::array<double, 4>& raw, const DesignBounds& bounds, const StretchParams& stretch);

inline std::array<double, 4> to_genes(const StationDesign& d) {
  return {static_cast<double>(d.access_cell), static_cast<double>(d.exit_cell), d.service_minutes, d.station_ratio};
}

}  // namespace ctms
