#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ctms {

/// Physical parameters of one highway cell (triangular fundamental diagram).
struct CellParams {
  double length_km = 0.0;        ///< L_i [km]
  double free_flow_speed = 0.0;  ///< v̄_i [km/h]
  double wave_speed = 0.0;       ///< w_i [km/h]
  double capacity = 0.0;         ///< q_i^max [veh/h]
  double jam_density = 0.0;      ///< ρ_i^max [veh/km]
  double offramp_ratio = 0.0;    ///< β_i, fraction of the cell outflow leaving via the off-ramp

  /// Throws DomainError naming `cells[index].<field>` on violation.
  void validate(std::size_t index) const;

  bool operator==(const CellParams&) const = default;
};

/// An ordered list of N >= 2 cells. Cell indices exposed to users are 1-based.
class StretchParams {
 public:
  StretchParams() = default;
  explicit StretchParams(std::vector<CellParams> cells);

  std::size_t size() const { return cells_.size(); }
  std::span<const CellParams> cells() const { return cells_; }
  /// 1-based access.
  const CellParams& cell(int index) const { return cells_.at(static_cast<std::size_t>(index - 1)); }

  /// Σ L_i / v̄_i in hours; the free-flow traversal time.
  double free_flow_travel_time() const;
  /// Largest step satisfying T · v̄_i <= L_i for every cell.
  double max_stable_step() const;

  bool operator==(const StretchParams&) const = default;

 private:
  std::vector<CellParams> cells_;
};

/// Service station design S = (i, j, δ, βˢ).
///
/// The service time is carried in minutes, the unit used by the design
/// bounds and every table; the dynamics convert it to a step lag.
struct StationDesign {
  int access_cell = 1;
  int exit_cell = 2;
  double service_minutes = 0.0;
  double station_ratio = 0.0;

  auto operator<=>(const StationDesign&) const = default;
};

/// Design parameters held fixed during optimization (F).
struct FixedParams {
  double mainstream_priority = 0.95;  ///< p^ms
  double ramp_capacity = 1500.0;      ///< r^{s,max} [veh/h]
  int station_cell_span = 2;          ///< L_(i,j) in cells

  void validate() const;

  bool operator==(const FixedParams&) const = default;
};

struct OnRampDemand {
  int cell = 1;                ///< 1-based receiving cell
  std::vector<double> demand;  ///< veh/h per step

  bool operator==(const OnRampDemand&) const = default;
};

/// External inputs: mainstream inflow φ₁(k) and optional on-ramp demands.
struct DemandProfile {
  double step_hours = 0.0025;
  std::vector<double> mainstream_inflow;
  std::vector<OnRampDemand> onramps;

  std::size_t horizon_steps() const { return mainstream_inflow.size(); }
  void validate(std::size_t cell_count) const;

  bool operator==(const DemandProfile&) const = default;
};

std::string to_string(const StationDesign& design);

}  // namespace ctms
