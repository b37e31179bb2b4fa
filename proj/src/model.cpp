#include "ctms/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ctms/error.hpp"

namespace ctms {

namespace {

void require_positive(double value, std::size_t index, const char* field) {
  if (!std::isfinite(value) || value <= 0.0)
    throw DomainError(fmt::format("cells[{}].{} (cell {}): must be finite and > 0, got {}", index, field, index + 1, value));
}

}  // namespace

void CellParams::validate(std::size_t index) const {
  require_positive(length_km, index, "length_km");
  require_positive(free_flow_speed, index, "free_flow_speed");
  require_positive(wave_speed, index, "wave_speed");
  require_positive(capacity, index, "capacity");
  require_positive(jam_density, index, "jam_density");
  if (!std::isfinite(offramp_ratio) || offramp_ratio < 0.0 || offramp_ratio >= 1.0)
    throw DomainError(fmt::format("cells[{}].offramp_ratio (cell {}): must lie in [0, 1), got {}", index, index + 1, offramp_ratio));
  if (wave_speed >= free_flow_speed)
    throw DomainError(fmt::format("cells[{}].wave_speed (cell {}): must be below free_flow_speed ({} >= {})", index, index + 1,
                                  wave_speed, free_flow_speed));
}

StretchParams::StretchParams(std::vector<CellParams> cells) : cells_(std::move(cells)) {
  if (cells_.size() < 2) throw DomainError(fmt::format("cells: a stretch needs at least 2 cells, got {}", cells_.size()));
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i].validate(i);
}

double StretchParams::free_flow_travel_time() const {
  double total = 0.0;
  for (const auto& c : cells_) total += c.length_km / c.free_flow_speed;
  return total;
}

double StretchParams::max_stable_step() const {
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& c : cells_) bound = std::min(bound, c.length_km / c.free_flow_speed);
  return bound;
}

void FixedParams::validate() const {
  if (!(mainstream_priority > 0.0 && mainstream_priority <= 1.0))
    throw DomainError(fmt::format("fixed.mainstream_priority: must lie in (0, 1], got {}", mainstream_priority));
  if (!(ramp_capacity > 0.0) || !std::isfinite(ramp_capacity))
    throw DomainError(fmt::format("fixed.ramp_capacity: must be > 0, got {}", ramp_capacity));
  if (station_cell_span < 1)
    throw DomainError(fmt::format("fixed.station_cell_span: must be >= 1, got {}", station_cell_span));
}

void DemandProfile::validate(std::size_t cell_count) const {
  if (!(step_hours > 0.0) || !std::isfinite(step_hours))
    throw DomainError(fmt::format("profile.step_hours: must be > 0, got {}", step_hours));
  for (std::size_t k = 0; k < mainstream_inflow.size(); ++k)
    if (!std::isfinite(mainstream_inflow[k]) || mainstream_inflow[k] < 0.0)
      throw DomainError(fmt::format("profile.mainstream_inflow[{}]: must be finite and >= 0", k));
  for (std::size_t r = 0; r < onramps.size(); ++r) {
    const auto& ramp = onramps[r];
    if (ramp.cell < 1 || static_cast<std::size_t>(ramp.cell) > cell_count)
      throw DomainError(fmt::format("profile.onramps[{}].cell: {} outside 1..{}", r, ramp.cell, cell_count));
    if (ramp.demand.size() != mainstream_inflow.size())
      throw DomainError(fmt::format("profile.onramps[{}].demand: length {} differs from horizon {}", r,
                                    ramp.demand.size(), mainstream_inflow.size()));
    for (std::size_t k = 0; k < ramp.demand.size(); ++k)
      if (!std::isfinite(ramp.demand[k]) || ramp.demand[k] < 0.0)
        throw DomainError(fmt::format("profile.onramps[{}].demand[{}]: must be finite and >= 0", r, k));
    for (std::size_t q = 0; q < r; ++q)
      if (onramps[q].cell == ramp.cell)
        throw DomainError(fmt::format("profile.onramps[{}].cell: duplicate on-ramp at cell {}", r, ramp.cell));
  }
}

std::string to_string(const StationDesign& d) {
  return fmt::format("({}, {}, {} min, {})", d.access_cell, d.exit_cell, d.service_minutes, d.station_ratio);
}

}  // namespace ctms
