#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctms/dynamics.hpp"
#include "ctms/model.hpp"

namespace ctms {

/// Extra travel time over the stretch at one step, Σ L_i/v_i − L_i/v̄_i [h].
double step_delay(std::span<const double> speeds, const StretchParams& stretch);

/// Δ(k) for every step of a trajectory [h].
std::vector<double> delay_series(const SimTrajectory& traj, const StretchParams& stretch);

/// ξΔ = T Σ Δ(k), reported in minutes.
double xi_delta(std::span<const double> delay_series, double step_hours);

struct PeakReduction {
  double value = 0.0;
  /// The no-station baseline never congests, so there is no peak to reduce and value is 0.
  bool no_baseline_congestion = false;
};

/// πΔ = (max Δ₀ − max Δ) / max Δ₀.
PeakReduction pi_delta(std::span<const double> delay_series, std::span<const double> baseline_series);

/// c(S|P) = α ξΔ − πΔ.
double design_cost(double xi_minutes, double pi, double alpha);

/// α for which α ξΔ is the relative congestion index: 1 / Σ L_i/v̄_i, with the
/// free-flow time expressed in minutes like ξΔ.
double rci_alpha(const StretchParams& stretch);

/// Δ(k) of a run without keeping the trajectory.
std::vector<double> simulate_delay(const StretchParams& stretch, const std::optional<StationDesign>& design,
                                   const FixedParams& fixed, const DemandProfile& profile);

struct DesignScore {
  double xi_delta_min = 0.0;
  double pi_delta = 0.0;
  double cost = 0.0;

  bool operator==(const DesignScore&) const = default;
};

struct CongestionReport {
  std::vector<double> delay_series;  ///< Δ(k) [h]
  double xi_delta_min = 0.0;
  double pi_delta = 0.0;
  double cost = 0.0;
  double alpha = 0.0;
  double baseline_peak = 0.0;  ///< max_k Δ₀(k) [h]
  bool no_baseline_congestion = false;

  DesignScore score() const { return {xi_delta_min, pi_delta, cost}; }
};

/// Scores designs on one (stretch, profile) pair. The no-station baseline Δ₀
/// is simulated once at construction and shared by every evaluation.
/// Thread-safe: evaluation only reads members.
class CostEvaluator {
 public:
  CostEvaluator(StretchParams stretch, FixedParams fixed, DemandProfile profile, double alpha);

  DesignScore score(const StationDesign& design) const;
  CongestionReport report(const std::optional<StationDesign>& design) const;

  const StretchParams& stretch() const { return stretch_; }
  const FixedParams& fixed() const { return fixed_; }
  const DemandProfile& profile() const { return profile_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& baseline_series() const { return baseline_; }
  double baseline_peak() const { return baseline_peak_; }
  double baseline_xi() const { return baseline_xi_; }

 private:
  StretchParams stretch_;
  FixedParams fixed_;
  DemandProfile profile_;
  double alpha_;
  std::vector<double> baseline_;
  double baseline_peak_ = 0.0;
  double baseline_xi_ = 0.0;
};

/// "i,j,delta_min,beta_s,xi_delta_min,pi_delta,cost"
std::string score_csv_header();
std::string score_csv_row(const StationDesign& design, const DesignScore& score);

}  // namespace ctms
