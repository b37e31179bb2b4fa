#include "ctms/design_space.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ctms/error.hpp"

namespace ctms {

DesignBounds DesignBounds::defaults(const FixedParams& fixed) {
  DesignBounds b;
  b.span = fixed.station_cell_span;
  return b;
}

void DesignBounds::validate(const StretchParams& stretch) const {
  const int n = static_cast<int>(stretch.size());
  if (span < 1 || span >= n) throw ConfigError(fmt::format("bounds.span {} must lie in 1..{}", span, n - 1));
  if (!(min_service_minutes >= 0.0) || !(min_service_minutes <= max_service_minutes) ||
      !std::isfinite(max_service_minutes))
    throw ConfigError(fmt::format("bounds.service_minutes [{}, {}] is not a nonnegative range", min_service_minutes,
                                  max_service_minutes));
  if (!(min_ratio >= 0.0) || !(min_ratio <= max_ratio) || !(max_ratio <= 1.0))
    throw ConfigError(fmt::format("bounds.station_ratio [{}, {}] must lie within [0, 1]", min_ratio, max_ratio));
  for (int c : access_cells)
    if (c < 1 || c > n) throw ConfigError(fmt::format("bounds.access_cells: cell {} outside 1..{}", c, n));
  for (int c : excluded_cells)
    if (c < 1 || c > n) throw ConfigError(fmt::format("bounds.excluded_cells: cell {} outside 1..{}", c, n));
}

double max_station_ratio(const DesignBounds& bounds, const StretchParams& stretch, int access_cell) {
  return std::min(bounds.max_ratio, 1.0 - stretch.cell(access_cell).offramp_ratio);
}

std::vector<int> admissible_access_cells(const DesignBounds& bounds, const StretchParams& stretch) {
  const int n = static_cast<int>(stretch.size());
  std::vector<int> out;
  for (int i = 1; i + bounds.span <= n; ++i) {
    if (!bounds.access_cells.empty() &&
        std::find(bounds.access_cells.begin(), bounds.access_cells.end(), i) == bounds.access_cells.end())
      continue;
    if (bounds.excluded_cells.contains(i) || bounds.excluded_cells.contains(i + bounds.span)) continue;
    if (max_station_ratio(bounds, stretch, i) < bounds.min_ratio) continue;
    out.push_back(i);
  }
  return out;
}

bool is_feasible(const StationDesign& d, const DesignBounds& bounds, const StretchParams& stretch) {
  const int n = static_cast<int>(stretch.size());
  if (d.exit_cell - d.access_cell != bounds.span) return false;
  if (d.access_cell < 1 || d.exit_cell > n) return false;
  if (!bounds.access_cells.empty() &&
      std::find(bounds.access_cells.begin(), bounds.access_cells.end(), d.access_cell) == bounds.access_cells.end())
    return false;
  if (bounds.excluded_cells.contains(d.access_cell) || bounds.excluded_cells.contains(d.exit_cell)) return false;
  if (!(d.service_minutes >= bounds.min_service_minutes && d.service_minutes <= bounds.max_service_minutes))
    return false;
  if (!(d.station_ratio >= bounds.min_ratio && d.station_ratio <= bounds.max_ratio)) return false;
  return d.station_ratio + stretch.cell(d.access_cell).offramp_ratio <= 1.0;
}

namespace {

std::vector<int> require_admissible(const DesignBounds& bounds, const StretchParams& stretch) {
  bounds.validate(stretch);
  auto cells = admissible_access_cells(bounds, stretch);
  if (cells.empty()) throw ConfigError("feasible design set is empty: no admissible access cell");
  return cells;
}

}  // namespace

StationDesign sample_uniform(const DesignBounds& bounds, const StretchParams& stretch, Rng& rng) {
  const auto cells = require_admissible(bounds, stretch);
  StationDesign d;
  d.access_cell = cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cells.size()) - 1))];
  d.exit_cell = d.access_cell + bounds.span;
  d.service_minutes = rng.uniform(bounds.min_service_minutes, bounds.max_service_minutes);
  d.station_ratio = rng.uniform(bounds.min_ratio, max_station_ratio(bounds, stretch, d.access_cell));
  return d;
}

StationDesign sample_uniform(const DesignBounds& bounds, const StretchParams& stretch, std::uint64_t seed) {
  Rng rng(seed);
  return sample_uniform(bounds, stretch, rng);
}

StationDesign project(const std::array<double, 4>& raw, const DesignBounds& bounds, const StretchParams& stretch) {
  for (double v : raw)
    if (std::isnan(v)) throw DomainError("cannot project a design vector containing NaN");
  const auto cells = require_admissible(bounds, stretch);

  int best = cells.front();
  double best_distance = std::abs(raw[0] - best);
  for (int c : cells) {
    const double distance = std::abs(raw[0] - c);
    if (distance < best_distance) {  // strict: ties keep the lower index
      best = c;
      best_distance = distance;
    }
  }
  StationDesign d;
  d.access_cell = best;
  d.exit_cell = best + bounds.span;
  d.service_minutes = std::clamp(raw[2], bounds.min_service_minutes, bounds.max_service_minutes);
  d.station_ratio = std::clamp(raw[3], bounds.min_ratio, max_station_ratio(bounds, stretch, best));
  return d;
}

}  // namespace ctms
