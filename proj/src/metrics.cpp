#include "ctms/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ctms/error.hpp"

namespace ctms {

namespace {

constexpr double kMinutesPerHour = 60.0;

double peak(std::span<const double> series) {
  double m = 0.0;
  for (double v : series) m = std::max(m, v);
  return m;
}

}  // namespace

double step_delay(std::span<const double> speeds, const StretchParams& stretch) {
  if (speeds.size() != stretch.size())
    throw DomainError(fmt::format("speed vector has {} cells, stretch has {}", speeds.size(), stretch.size()));
  double total = 0.0;
  const auto cells = stretch.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double v = speeds[i];
    if (!(v > 0.0)) throw ConsistencyError(fmt::format("realized speed of cell {} is {}", i + 1, v));
    // v <= v̄ holds by construction, so each term is >= 0 up to rounding.
    total += std::max(0.0, cells[i].length_km / v - cells[i].length_km / cells[i].free_flow_speed);
  }
  return total;
}

std::vector<double> delay_series(const SimTrajectory& traj, const StretchParams& stretch) {
  if (traj.cells != stretch.size())
    throw DomainError(fmt::format("trajectory has {} cells, stretch has {}", traj.cells, stretch.size()));
  std::vector<double> out(traj.steps);
  for (std::size_t k = 0; k < traj.steps; ++k)
    out[k] = step_delay(std::span(traj.speed).subspan(k * traj.cells, traj.cells), stretch);
  return out;
}

double xi_delta(std::span<const double> series, double step_hours) {
  double sum = 0.0;
  for (double v : series) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError(fmt::format("delay value {} must be finite and >= 0", v));
    sum += v;
  }
  return step_hours * sum * kMinutesPerHour;
}

PeakReduction pi_delta(std::span<const double> series, std::span<const double> baseline) {
  if (series.size() != baseline.size())
    throw DomainError(fmt::format("delay series length {} differs from baseline length {}", series.size(),
                                  baseline.size()));
  const double base_peak = peak(baseline);
  if (base_peak == 0.0) return {0.0, true};
  return {(base_peak - peak(series)) / base_peak, false};
}

double design_cost(double xi_minutes, double pi, double alpha) { return alpha * xi_minutes - pi; }

double rci_alpha(const StretchParams& stretch) { return 1.0 / (stretch.free_flow_travel_time() * kMinutesPerHour); }

std::vector<double> simulate_delay(const StretchParams& stretch, const std::optional<StationDesign>& design,
                                   const FixedParams& fixed, const DemandProfile& profile) {
  const Simulator sim(stretch, design, fixed, profile.step_hours);
  SimState state = sim.initial_state();
  std::vector<double> out(profile.horizon_steps());
  sim.run(profile, state, [&](std::size_t k, const StepFlows& f) { out[k] = step_delay(f.speed, stretch); });
  return out;
}

CostEvaluator::CostEvaluator(StretchParams stretch, FixedParams fixed, DemandProfile profile, double alpha)
    : stretch_(std::move(stretch)), fixed_(fixed), profile_(std::move(profile)), alpha_(alpha) {
  if (!std::isfinite(alpha_)) throw DomainError("alpha must be finite");
  baseline_ = simulate_delay(stretch_, std::nullopt, fixed_, profile_);
  baseline_peak_ = peak(baseline_);
  baseline_xi_ = xi_delta(baseline_, profile_.step_hours);
}

DesignScore CostEvaluator::score(const StationDesign& design) const {
  const auto series = simulate_delay(stretch_, design, fixed_, profile_);
  const double xi = xi_delta(series, profile_.step_hours);
  const double pi = pi_delta(series, baseline_).value;
  return {xi, pi, design_cost(xi, pi, alpha_)};
}

CongestionReport CostEvaluator::report(const std::optional<StationDesign>& design) const {
  CongestionReport r;
  r.delay_series = design ? simulate_delay(stretch_, design, fixed_, profile_) : baseline_;
  r.xi_delta_min = xi_delta(r.delay_series, profile_.step_hours);
  const auto pi = pi_delta(r.delay_series, baseline_);
  r.pi_delta = pi.value;
  r.no_baseline_congestion = pi.no_baseline_congestion;
  r.alpha = alpha_;
  r.baseline_peak = baseline_peak_;
  r.cost = design_cost(r.xi_delta_min, r.pi_delta, alpha_);
  return r;
}

std::string score_csv_header() { return "i,j,delta_min,beta_s,xi_delta_min,pi_delta,cost"; }

std::string score_csv_row(const StationDesign& d, const DesignScore& s) {
  return fmt::format("{},{},{},{},{},{},{}", d.access_cell, d.exit_cell, d.service_minutes, d.station_ratio,
                     s.xi_delta_min, s.pi_delta, s.cost);
}

}  // namespace ctms
