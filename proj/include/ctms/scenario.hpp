#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctms/design_space.hpp"
#include "ctms/ga.hpp"
#include "ctms/metrics.hpp"
#include "ctms/model.hpp"

namespace ctms {

/// Smooth working-day demand: a base flow plus a morning and an evening
/// Gaussian peak. Flows in veh/h, times in hours.
struct BimodalProfileSpec {
  double base_flow = 350.0;
  double morning_peak_flow = 1500.0;
  double morning_peak_hour = 8.0;
  double morning_width_h = 1.5;
  double evening_peak_flow = 1500.0;
  double evening_peak_hour = 17.5;
  double evening_width_h = 1.5;
  double horizon_h = 24.0;

  void validate() const;

  bool operator==(const BimodalProfileSpec&) const = default;
};

/// φ₁(k) = base + Σ peak · exp(−(t_k − hour)² / (2 width²)), t_k = k T.
DemandProfile synthesize_profile(const BimodalProfileSpec& spec, double step_hours);

struct NamedDesign {
  std::string name;
  StationDesign design;

  bool operator==(const NamedDesign&) const = default;
};

struct Scenario {
  std::string name;
  StretchParams stretch;
  FixedParams fixed;
  DesignBounds bounds;
  double step_hours = 0.0025;
  double alpha = 0.01;
  std::variant<BimodalProfileSpec, DemandProfile> profile = BimodalProfileSpec{};
  std::vector<NamedDesign> reference_designs;

  DemandProfile demand() const;
  const StationDesign* reference(std::string_view design_name) const;
  /// Dimensions, CFL, bounds and reference designs; throws ConfigError/DomainError.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

nlohmann::ordered_json to_json(const Scenario& scenario);
/// Rejects unknown keys, naming the offending path.
Scenario scenario_from_json(const nlohmann::json& doc);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Built-in case studies "A2" and "A4" (single lane, 15 cells each).
std::vector<Scenario> builtin_catalog();
/// Case-insensitive lookup in the catalog; nullopt if unknown.
std::optional<Scenario> builtin_scenario(std::string_view name);
/// A built-in name or a path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

struct ComparisonRow {
  std::string name;
  StationDesign design;
  DesignScore score;
};

/// Reference placement with the optimum's δ and βˢ ("behavior only") and the
/// optimum's placement with the reference δ and βˢ ("placement only").
std::pair<NamedDesign, NamedDesign> mixed_designs(const StationDesign& reference, const StationDesign& optimum);

/// Simulates each design on the scenario and reports ξΔ, πΔ and cost.
/// Designs must be feasible for the scenario bounds.
std::vector<ComparisonRow> compare_designs(const Scenario& scenario, const std::vector<NamedDesign>& designs,
                                           const CostEvaluator& evaluator);

/// Rows for reference, behavior-only, placement-only and optimum.
std::vector<ComparisonRow> compare_with_optimum(const Scenario& scenario, const StationDesign& reference,
                                                const StationDesign& optimum, const CostEvaluator& evaluator);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

struct CaseStudyOptions {
  GAConfig ga;
  std::set<int> excluded_cells;
  std::string reference_name = "S_real";
  int max_rounds = 4;
};

struct CaseStudyResult {
  StationDesign optimum;
  std::vector<ComparisonRow> rows;  ///< S_real, S_behavior, S_placement, S_star
  std::vector<GARun> ga_runs;
};

/// GA seeded with the reference design. When a mixed design beats the GA
/// optimum the GA is rerun seeded with it, so the optimum row never loses
/// to the reference or either mixed row.
CaseStudyResult run_case_study(const Scenario& scenario, const CaseStudyOptions& options);

}  // namespace ctms
