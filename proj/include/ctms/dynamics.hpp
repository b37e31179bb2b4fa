#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ctms/error.hpp"
#include "ctms/model.hpp"

namespace ctms {

/// Sending function of the triangular fundamental diagram: min(v̄ρ, q^max).
double cell_demand(const CellParams& cell, double density);

/// Receiving function: min(w(ρ^max − ρ), q^max).
double cell_supply(const CellParams& cell, double density);

struct MergeFlows {
  double mainstream = 0.0;
  double station = 0.0;
};

/// Priority merge of the mainstream and a second stream into one receiving cell.
/// Under contention each stream gets the median of its demand, the leftover
/// supply and its priority share, so the total equals min(supply, demand sum).
MergeFlows merge_at_exit(double mainstream_demand, double station_demand, double supply, double priority);

/// Station merge-back demand min(sˢ(k − d) + e/T, r^{s,max}).
double station_exit_demand(double delayed_entry, double exit_queue, double ramp_capacity, double step_hours);

/// Service lag in steps, round(δ / T).
int delay_steps(double service_minutes, double step_hours);

/// Dynamic state x(k). Queues are in vehicles, flows in veh/h.
struct SimState {
  std::vector<double> density;         ///< ρ_i [veh/km]
  double station_count = 0.0;          ///< ℓ [veh]
  double exit_queue = 0.0;             ///< e [veh]
  std::vector<double> service_buffer;  ///< ring of the last d station-entry flows; oldest at buffer_head
  std::size_t buffer_head = 0;
  double origin_queue = 0.0;           ///< mainstream demand not yet admitted to cell 1 [veh]
  std::vector<double> ramp_queues;     ///< per-cell on-ramp backlog [veh]

  static SimState empty(std::size_t cells, int delay_steps);

  /// Vehicles on the road and inside the station.
  double vehicles_on_network(const StretchParams& stretch) const;
  /// Vehicles waiting upstream of the network (origin and on-ramp backlogs).
  double vehicles_queued() const;

  bool operator==(const SimState&) const = default;
};

/// Flows realized during one step plus the state the step started from.
struct StepFlows {
  std::vector<double> density;      ///< ρ_i(k)
  std::vector<double> inflow;       ///< φ_i(k): flow entering cell i from upstream (i = 1 is the admitted inflow)
  std::vector<double> total_in;     ///< Φ⁺_i(k)
  std::vector<double> total_out;    ///< Φ⁻_i(k)
  std::vector<double> onramp;       ///< r_i(k)
  std::vector<double> offramp;      ///< s_i(k)
  std::vector<double> speed;        ///< v_i(k)
  double outflow = 0.0;             ///< φ_{N+1}(k), leaving the last cell downstream
  double offered_inflow = 0.0;      ///< φ₁(k) as given by the profile
  std::vector<double> offered_onramp;  ///< external on-ramp demand this step
  double station_entry = 0.0;       ///< sˢ_i(k)
  double delayed_entry = 0.0;       ///< sˢ_i(k − d)
  double station_exit_demand = 0.0; ///< Dˢ(k)
  double station_exit = 0.0;        ///< rˢ_j(k)
  double station_count = 0.0;       ///< ℓ(k)
  double exit_queue = 0.0;          ///< e(k)

  void resize(std::size_t cells);
};

/// Full time-indexed record of one run. Per-cell series are stored row-major (step × cell).
struct SimTrajectory {
  std::size_t cells = 0;
  std::size_t steps = 0;
  double step_hours = 0.0;

  std::vector<double> density, inflow, total_inflow, total_outflow, onramp_flow, offramp_flow, speed;
  std::vector<double> outflow, offered_inflow, offered_onramp, station_entry, station_exit, station_count,
      exit_queue;

  SimState initial_state;
  SimState final_state;

  double at(const std::vector<double>& series, std::size_t step, std::size_t cell) const {
    return series[step * cells + cell];
  }

  bool operator==(const SimTrajectory&) const = default;
};

/// One stretch + optional station + fixed parameters + step size. Validates
/// CFL and the design at construction; stepping is allocation free.
class Simulator {
 public:
  Simulator(const StretchParams& stretch, const std::optional<StationDesign>& design, const FixedParams& fixed,
            double step_hours);

  SimState initial_state() const { return SimState::empty(stretch_.size(), delay_); }

  /// Advances `state` by one step. `onramp_demand` is either empty or one
  /// value per cell [veh/h].
  void step(SimState& state, double inflow, std::span<const double> onramp_demand, StepFlows& flows) const;

  /// Runs the whole profile, calling observer(k, flows) after each step.
  template <typename Observer>
  void run(const DemandProfile& profile, SimState& state, Observer&& observer) const;

  const StretchParams& stretch() const { return stretch_; }
  const std::optional<StationDesign>& design() const { return design_; }
  double step_hours() const { return step_; }
  /// Lag actually applied (see constructor notes on adjacent cells).
  int delay() const { return delay_; }

 private:
  double finalize_outflow(std::size_t cell, double mainstream_out, StepFlows& f) const;

  StretchParams stretch_;
  std::optional<StationDesign> design_;
  FixedParams fixed_;
  double step_;
  int delay_ = 0;
  std::size_t access_ = 0;  // 0-based
  std::size_t exit_ = 0;    // 0-based
  double station_ratio_ = 0.0;
  std::vector<double> mainstream_share_;  // 1 − β_i − βˢ_i
  std::vector<double> step_over_length_;  // T / L_i
  std::vector<char> has_ramp_;
};

/// Single-step form of the dynamics x(k+1) = f(x(k), S, P, F).
SimState step(const SimState& state, const StretchParams& stretch, const std::optional<StationDesign>& design,
              const FixedParams& fixed, double inflow, std::span<const double> onramp_demand, double step_hours);

/// Simulates the whole horizon. `design` absent means no station; `x0` absent
/// means an empty network.
SimTrajectory simulate(const StretchParams& stretch, const std::optional<StationDesign>& design,
                       const FixedParams& fixed, const DemandProfile& profile,
                       const std::optional<SimState>& x0 = std::nullopt);

/// Empty string when every SimState bound holds, else a description of the first violation.
std::string check_state(const SimState& state, const StretchParams& stretch);

template <typename Observer>
void Simulator::run(const DemandProfile& profile, SimState& state, Observer&& observer) const {
  profile.validate(stretch_.size());
  if (profile.step_hours != step_)
    throw ConfigError(fmt::format("profile step {} h differs from simulator step {} h", profile.step_hours, step_));
  StepFlows flows;
  flows.resize(stretch_.size());
  std::vector<double> ramps(profile.onramps.empty() ? 0 : stretch_.size(), 0.0);
  for (std::size_t k = 0; k < profile.horizon_steps(); ++k) {
    for (const auto& ramp : profile.onramps) ramps[static_cast<std::size_t>(ramp.cell - 1)] = ramp.demand[k];
    try {
      step(state, profile.mainstream_inflow[k], ramps, flows);
    } catch (const ConsistencyError& e) {
      throw ConsistencyError(fmt::format("step {}: {}", k + 1, e.what()));
    }
    observer(k, flows);
  }
}

}  // namespace ctms
