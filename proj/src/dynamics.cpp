#include "ctms/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ctms {

namespace {

// Float rounding may push a quantity that is mathematically >= 0 a few ulps
// below zero; anything further below is a real inconsistency.
constexpr double kSpeedRoundoff = 1e-12;
constexpr double kRoundoff = 1e-9;

double median3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

double settle_nonnegative(double value, double scale, const char* what) {
  if (std::isnan(value)) throw ConsistencyError(fmt::format("{} is NaN", what));
  if (value >= 0.0) return value;
  if (value >= -kRoundoff * std::max(1.0, scale)) return 0.0;
  throw ConsistencyError(fmt::format("{} became negative ({})", what, value));
}

void require_density(const CellParams& cell, double density) {
  if (!(density >= 0.0 && density <= cell.jam_density))
    throw DomainError(fmt::format("density {} outside [0, {}]", density, cell.jam_density));
}

}  // namespace

double cell_demand(const CellParams& cell, double density) {
  require_density(cell, density);
  return std::min(cell.free_flow_speed * density, cell.capacity);
}

double cell_supply(const CellParams& cell, double density) {
  require_density(cell, density);
  return std::min(cell.wave_speed * (cell.jam_density - density), cell.capacity);
}

MergeFlows merge_at_exit(double mainstream_demand, double station_demand, double supply, double priority) {
  if (!(mainstream_demand >= 0.0) || !(station_demand >= 0.0) || !(supply >= 0.0))
    throw DomainError(fmt::format("merge inputs must be >= 0 (mainstream {}, station {}, supply {})",
                                  mainstream_demand, station_demand, supply));
  if (!(priority > 0.0 && priority <= 1.0)) throw DomainError(fmt::format("merge priority {} outside (0, 1]", priority));
  if (mainstream_demand + station_demand <= supply) return {mainstream_demand, station_demand};
  return {median3(mainstream_demand, supply - station_demand, priority * supply),
          median3(station_demand, supply - mainstream_demand, (1.0 - priority) * supply)};
}

double station_exit_demand(double delayed_entry, double exit_queue, double ramp_capacity, double step_hours) {
  return std::min(delayed_entry + exit_queue / step_hours, ramp_capacity);
}

int delay_steps(double service_minutes, double step_hours) {
  return static_cast<int>(std::lround(service_minutes / 60.0 / step_hours));
}

SimState SimState::empty(std::size_t cells, int delay) {
  SimState s;
  s.density.assign(cells, 0.0);
  s.service_buffer.assign(static_cast<std::size_t>(std::max(delay, 0)), 0.0);
  s.ramp_queues.assign(cells, 0.0);
  return s;
}

double SimState::vehicles_on_network(const StretchParams& stretch) const {
  double total = station_count;
  for (std::size_t i = 0; i < density.size(); ++i) total += density[i] * stretch.cells()[i].length_km;
  return total;
}

double SimState::vehicles_queued() const {
  double total = origin_queue;
  for (double q : ramp_queues) total += q;
  return total;
}

void StepFlows::resize(std::size_t cells) {
  for (auto* v : {&density, &inflow, &total_in, &total_out, &onramp, &offramp, &speed, &offered_onramp})
    v->assign(cells, 0.0);
}

Simulator::Simulator(const StretchParams& stretch, const std::optional<StationDesign>& design,
                     const FixedParams& fixed, double step_hours)
    : stretch_(stretch), design_(design), fixed_(fixed), step_(step_hours) {
  fixed_.validate();
  const std::size_t n = stretch_.size();
  if (n < 2) throw DomainError("stretch has fewer than 2 cells");
  if (!(step_ > 0.0) || !std::isfinite(step_)) throw ConfigError(fmt::format("step {} h must be > 0", step_));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = stretch_.cells()[i];
    if (step_ * c.free_flow_speed > c.length_km)
      throw ConfigError(fmt::format("CFL violated at cell {}: T·v̄ = {} km > L = {} km (T must be <= {} h)", i + 1,
                                    step_ * c.free_flow_speed, c.length_km, stretch_.max_stable_step()));
  }

  mainstream_share_.resize(n);
  step_over_length_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    mainstream_share_[i] = 1.0 - stretch_.cells()[i].offramp_ratio;
    step_over_length_[i] = step_ / stretch_.cells()[i].length_km;
  }

  if (design_) {
    const auto& d = *design_;
    if (d.access_cell < 1 || d.exit_cell <= d.access_cell || static_cast<std::size_t>(d.exit_cell) > n)
      throw DomainError(fmt::format("design {}: need 1 <= i < j <= {}", to_string(d), n));
    if (!(d.service_minutes >= 0.0) || !std::isfinite(d.service_minutes))
      throw DomainError(fmt::format("design {}: service time must be >= 0", to_string(d)));
    const double beta = stretch_.cell(d.access_cell).offramp_ratio;
    if (!(d.station_ratio >= 0.0 && d.station_ratio <= 1.0) || d.station_ratio + beta > 1.0)
      throw DomainError(fmt::format("design {}: station ratio must satisfy 0 <= βˢ <= 1 − β_i = {}", to_string(d),
                                    1.0 - beta));
    access_ = static_cast<std::size_t>(d.access_cell - 1);
    exit_ = static_cast<std::size_t>(d.exit_cell - 1);
    station_ratio_ = d.station_ratio;
    mainstream_share_[access_] = std::max(0.0, 1.0 - beta - station_ratio_);
    delay_ = delay_steps(d.service_minutes, step_);
    // With adjacent cells a zero lag would make the merge-back demand depend
    // on the entry flow of the same step; such entries leave one step later.
    if (delay_ == 0 && exit_ == access_ + 1) delay_ = 1;
  }
}

double Simulator::finalize_outflow(std::size_t c, double mainstream_out, StepFlows& f) const {
  const auto& cell = stretch_.cells()[c];
  const double share = mainstream_share_[c];
  const double total = share > 0.0 ? mainstream_out / share : std::min(cell.free_flow_speed * f.density[c], cell.capacity);
  const double off = cell.offramp_ratio * total;
  const double into_station = (design_ && c == access_) ? station_ratio_ * total : 0.0;
  f.offramp[c] = off;
  f.total_out[c] = mainstream_out + off + into_station;
  return into_station;
}

void Simulator::step(SimState& s, double inflow, std::span<const double> onramp_demand, StepFlows& f) const {
  const std::size_t n = stretch_.size();
  const auto cells = stretch_.cells();
  const double T = step_;
  const bool ramps = !onramp_demand.empty();
  if (ramps && onramp_demand.size() != n)
    throw DomainError(fmt::format("on-ramp demand has {} entries for {} cells", onramp_demand.size(), n));
  if (!(inflow >= 0.0)) throw DomainError(fmt::format("mainstream inflow {} must be >= 0", inflow));

  f.offered_inflow = inflow;
  f.station_entry = f.delayed_entry = f.station_exit_demand = f.station_exit = 0.0;
  f.station_count = s.station_count;
  f.exit_queue = s.exit_queue;

  const bool station = design_.has_value();
  double delayed = (station && delay_ > 0) ? s.service_buffer[s.buffer_head] : 0.0;

  // Upstream sweep: φ_i for cell i, then the outflow split of cell i−1.
  double upstream = inflow + s.origin_queue / T;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cell = cells[i];
    const double rho = s.density[i];
    if (!(rho >= 0.0 && rho <= cell.jam_density))
      throw ConsistencyError(fmt::format("density {} of cell {} outside [0, {}]", rho, i + 1, cell.jam_density));
    f.density[i] = rho;
    const double supply = std::min(cell.wave_speed * (cell.jam_density - rho), cell.capacity);

    double phi = 0.0;
    double ramp_flow = 0.0;
    double ramp_wanted = 0.0;
    if (ramps) {
      f.offered_onramp[i] = onramp_demand[i];
      ramp_wanted = onramp_demand[i] + s.ramp_queues[i] / T;
    }
    if (ramp_wanted > 0.0) {
      const auto m = merge_at_exit(upstream, ramp_wanted, supply, fixed_.mainstream_priority);
      phi = m.mainstream;
      ramp_flow = m.station;
    } else {
      phi = std::min(upstream, supply);
    }
    if (station && i == exit_) {
      if (delay_ == 0) delayed = f.station_entry;
      const double demand = station_exit_demand(delayed, s.exit_queue, fixed_.ramp_capacity, T);
      f.delayed_entry = delayed;
      f.station_exit_demand = demand;
      if (ramp_wanted > 0.0) {
        // The station yields to both mainstream and on-ramp traffic.
        f.station_exit = std::min(demand, std::max(0.0, supply - phi - ramp_flow));
      } else {
        const auto m = merge_at_exit(upstream, demand, supply, fixed_.mainstream_priority);
        phi = m.mainstream;
        f.station_exit = m.station;
      }
    }
    f.inflow[i] = phi;
    f.onramp[i] = ramp_flow;
    if (i > 0) {
      const double entry = finalize_outflow(i - 1, phi, f);
      if (station && i - 1 == access_) f.station_entry = entry;
    }
    upstream = mainstream_share_[i] * std::min(cell.free_flow_speed * rho, cell.capacity);
  }
  f.outflow = upstream;
  {
    const double entry = finalize_outflow(n - 1, upstream, f);
    if (station && n - 1 == access_) f.station_entry = entry;
  }

  // Densities (Φ⁺ − Φ⁻) and realized speeds, both from ρ(k).
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cell = cells[i];
    f.total_in[i] = f.inflow[i] + f.onramp[i] + ((station && i == exit_) ? f.station_exit : 0.0);
    const double rho = f.density[i];
    // Outflow/density of a freely discharging cell can land an ulp below v̄;
    // snap it so free flow yields exactly zero delay.
    double speed = rho > 0.0 ? f.total_out[i] / rho : cell.free_flow_speed;
    if (speed >= cell.free_flow_speed * (1.0 - kSpeedRoundoff)) speed = cell.free_flow_speed;
    f.speed[i] = speed;
    double next = rho + step_over_length_[i] * (f.total_in[i] - f.total_out[i]);
    next = settle_nonnegative(next, cell.jam_density, "density");
    if (next > cell.jam_density) {
      if (next - cell.jam_density > kRoundoff * cell.jam_density)
        throw ConsistencyError(fmt::format("density of cell {} exceeds jam density ({})", i + 1, next));
      next = cell.jam_density;
    }
    s.density[i] = next;
    if (ramps) {
      s.ramp_queues[i] = settle_nonnegative(s.ramp_queues[i] + T * (onramp_demand[i] - f.onramp[i]),
                                            s.ramp_queues[i], "on-ramp queue");
    }
  }
  s.origin_queue = settle_nonnegative(s.origin_queue + T * (inflow - f.inflow[0]), s.origin_queue, "origin queue");

  if (station) {
    if (delay_ == 0) f.delayed_entry = delayed = f.station_entry;
    s.station_count = settle_nonnegative(s.station_count + T * (f.station_entry - f.station_exit), s.station_count,
                                         "station count");
    s.exit_queue =
        settle_nonnegative(s.exit_queue + T * (delayed - f.station_exit), s.exit_queue, "station exit queue");
    // ℓ − e equals T times the buffered entries, so any excess is roundoff.
    if (s.exit_queue > s.station_count) {
      if (s.exit_queue - s.station_count > kRoundoff * std::max(1.0, s.station_count))
        throw ConsistencyError(fmt::format("exit queue {} exceeds station count {}", s.exit_queue, s.station_count));
      s.exit_queue = s.station_count;
    }
    if (delay_ > 0) {
      s.service_buffer[s.buffer_head] = f.station_entry;
      s.buffer_head = (s.buffer_head + 1) % s.service_buffer.size();
    }
  }
}

SimState step(const SimState& state, const StretchParams& stretch, const std::optional<StationDesign>& design,
              const FixedParams& fixed, double inflow, std::span<const double> onramp_demand, double step_hours) {
  const Simulator sim(stretch, design, fixed, step_hours);
  if (state.density.size() != stretch.size())
    throw DomainError(fmt::format("state has {} cells, stretch has {}", state.density.size(), stretch.size()));
  if (state.service_buffer.size() != static_cast<std::size_t>(sim.delay()))
    throw DomainError(fmt::format("service buffer holds {} entries, design needs {}", state.service_buffer.size(),
                                  sim.delay()));
  SimState next = state;
  if (next.ramp_queues.size() != stretch.size()) next.ramp_queues.assign(stretch.size(), 0.0);
  StepFlows flows;
  flows.resize(stretch.size());
  sim.step(next, inflow, onramp_demand, flows);
  return next;
}

SimTrajectory simulate(const StretchParams& stretch, const std::optional<StationDesign>& design,
                       const FixedParams& fixed, const DemandProfile& profile, const std::optional<SimState>& x0) {
  const Simulator sim(stretch, design, fixed, profile.step_hours);
  SimState state = x0 ? *x0 : sim.initial_state();
  if (state.density.size() != stretch.size() ||
      state.service_buffer.size() != static_cast<std::size_t>(sim.delay()) ||
      state.ramp_queues.size() != stretch.size())
    throw DomainError("initial state dimensions do not match the stretch and design");
  if (auto problem = check_state(state, stretch); !problem.empty())
    throw DomainError("initial state invalid: " + problem);

  const std::size_t n = stretch.size();
  const std::size_t steps = profile.horizon_steps();
  SimTrajectory traj;
  traj.cells = n;
  traj.steps = steps;
  traj.step_hours = profile.step_hours;
  traj.initial_state = state;
  for (auto* v : {&traj.density, &traj.inflow, &traj.total_inflow, &traj.total_outflow, &traj.onramp_flow,
                  &traj.offramp_flow, &traj.speed, &traj.offered_onramp})
    v->resize(steps * n);
  for (auto* v : {&traj.outflow, &traj.offered_inflow, &traj.station_entry, &traj.station_exit,
                  &traj.station_count, &traj.exit_queue})
    v->resize(steps);

  sim.run(profile, state, [&](std::size_t k, const StepFlows& f) {
    const auto row = static_cast<std::ptrdiff_t>(k * n);
    std::copy(f.density.begin(), f.density.end(), traj.density.begin() + row);
    std::copy(f.inflow.begin(), f.inflow.end(), traj.inflow.begin() + row);
    std::copy(f.total_in.begin(), f.total_in.end(), traj.total_inflow.begin() + row);
    std::copy(f.total_out.begin(), f.total_out.end(), traj.total_outflow.begin() + row);
    std::copy(f.onramp.begin(), f.onramp.end(), traj.onramp_flow.begin() + row);
    std::copy(f.offramp.begin(), f.offramp.end(), traj.offramp_flow.begin() + row);
    std::copy(f.speed.begin(), f.speed.end(), traj.speed.begin() + row);
    std::copy(f.offered_onramp.begin(), f.offered_onramp.end(), traj.offered_onramp.begin() + row);
    traj.outflow[k] = f.outflow;
    traj.offered_inflow[k] = f.offered_inflow;
    traj.station_entry[k] = f.station_entry;
    traj.station_exit[k] = f.station_exit;
    traj.station_count[k] = f.station_count;
    traj.exit_queue[k] = f.exit_queue;
  });
  traj.final_state = std::move(state);
  return traj;
}

std::string check_state(const SimState& s, const StretchParams& stretch) {
  if (s.density.size() != stretch.size()) return "density size mismatch";
  for (std::size_t i = 0; i < s.density.size(); ++i) {
    const double rho = s.density[i];
    if (!(rho >= 0.0 && rho <= stretch.cells()[i].jam_density))
      return fmt::format("density of cell {} = {} outside [0, {}]", i + 1, rho, stretch.cells()[i].jam_density);
  }
  if (!(s.exit_queue >= 0.0)) return fmt::format("exit queue {} < 0", s.exit_queue);
  if (!(s.station_count >= s.exit_queue))
    return fmt::format("station count {} < exit queue {}", s.station_count, s.exit_queue);
  for (double v : s.service_buffer)
    if (!(v >= 0.0)) return fmt::format("service buffer entry {} < 0", v);
  if (!(s.origin_queue >= 0.0)) return "origin queue < 0";
  for (double q : s.ramp_queues)
    if (!(q >= 0.0)) return "on-ramp queue < 0";
  return {};
}

}  // namespace ctms
