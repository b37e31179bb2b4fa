#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ctms/design_space.hpp"
#include "ctms/metrics.hpp"
#include "ctms/rng.hpp"

namespace ctms {

/// What happens to offspring that leave the feasible set.
enum class InfeasiblePolicy {
  repair,   ///< project back onto the feasible set
  penalty,  ///< keep as is and assign kPenaltyFitness
};

inline constexpr double kPenaltyFitness = -1e6;

struct GAConfig {
  int population_size = 16;     ///< N_GA
  int elite_count = 4;          ///< N★_GA, survivors and parent pool
  double mutation_prob = 0.1;   ///< p_GA, per gene
  int stagnation_limit = 7;     ///< K_stop
  int max_generations = 200;
  std::uint64_t seed = 0;
  std::vector<StationDesign> seed_designs;  ///< injected into the first population
  InfeasiblePolicy infeasible = InfeasiblePolicy::repair;
  int jobs = 1;                 ///< concurrent fitness evaluations

  void validate() const;
};

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  StationDesign best_design;
};

struct GARun {
  StationDesign best_design;
  double best_cost = 0.0;
  std::vector<double> fitness_history;  ///< best fitness per generation
  int generations_run = 0;
  std::size_t evaluations_count = 0;    ///< simulations actually run (repeated designs are cached)
  bool stopped_on_stagnation = false;
  std::vector<GenerationStats> generations;
};

/// −c(S|P), using the evaluator's cached baseline.
double evaluate_fitness(const StationDesign& design, const CostEvaluator& evaluator);

/// Gene vector of parent_a with genes [first_cut, second_cut) taken from parent_b.
std::array<double, 4> crossover_genes(const StationDesign& parent_a, const StationDesign& parent_b, int first_cut,
                                      int second_cut);

StationDesign crossover_double_point(const StationDesign& parent_a, const StationDesign& parent_b, int first_cut,
                                     int second_cut, const DesignBounds& bounds, const StretchParams& stretch);

/// Draws two distinct cut points in 0..4 and repairs the child.
StationDesign crossover_double_point(const StationDesign& parent_a, const StationDesign& parent_b,
                                     const DesignBounds& bounds, const StretchParams& stretch, Rng& rng);

/// Resamples placement (i and j jointly), δ and βˢ each with probability `mutation_prob`.
StationDesign mutate(const StationDesign& design, const DesignBounds& bounds, const StretchParams& stretch,
                     double mutation_prob, Rng& rng);

/// Elitist GA over the feasible set. Stops after `stagnation_limit`
/// consecutive generations without improving the best fitness, or at
/// `max_generations`. Deterministic for a given config.seed regardless of jobs.
GARun run_ga(const CostEvaluator& evaluator, const DesignBounds& bounds, const GAConfig& config);

GARun run_ga(const StretchParams& stretch, const FixedParams& fixed, const DemandProfile& profile,
             const DesignBounds& bounds, double alpha, const GAConfig& config);

/// Per-generation CSV: generation,best_fitness,mean_fitness,i,j,delta_min,beta_s
void write_generation_log(std::ostream& out, const GARun& run);

}  // namespace ctms
