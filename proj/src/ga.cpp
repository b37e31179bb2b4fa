#include "ctms/ga.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "ctms/error.hpp"
#include "ctms/parallel.hpp"

namespace ctms {

namespace {

// Improvements at or below this size do not reset the stagnation counter.
constexpr double kImprovementThreshold = 1e-12;

struct Individual {
  StationDesign design;
  double fitness = 0.0;
};

StationDesign from_genes(const std::array<double, 4>& g) {
  return {static_cast<int>(std::lround(g[0])), static_cast<int>(std::lround(g[1])), g[2], g[3]};
}

}  // namespace

void GAConfig::validate() const {
  if (population_size < 1) throw ConfigError(fmt::format("GA population size {} must be >= 1", population_size));
  if (elite_count < 1 || elite_count > population_size)
    throw ConfigError(fmt::format("GA elite count {} must lie in 1..{}", elite_count, population_size));
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    throw ConfigError(fmt::format("GA mutation probability {} outside [0, 1]", mutation_prob));
  if (stagnation_limit < 1) throw ConfigError(fmt::format("GA stagnation limit {} must be >= 1", stagnation_limit));
  if (max_generations < 1) throw ConfigError(fmt::format("GA max generations {} must be >= 1", max_generations));
  if (seed_designs.size() > static_cast<std::size_t>(population_size))
    throw ConfigError(fmt::format("{} seed designs exceed the population size {}", seed_designs.size(),
                                  population_size));
}

double evaluate_fitness(const StationDesign& design, const CostEvaluator& evaluator) {
  try {
    return -evaluator.score(design).cost;
  } catch (const Error& e) {
    throw ConsistencyError(fmt::format("evaluating design {}: {}", to_string(design), e.what()));
  }
}

std::array<double, 4> crossover_genes(const StationDesign& a, const StationDesign& b, int first_cut, int second_cut) {
  if (first_cut < 0 || second_cut > 4 || first_cut > second_cut)
    throw DomainError(fmt::format("crossover cuts ({}, {}) must satisfy 0 <= c1 <= c2 <= 4", first_cut, second_cut));
  auto child = to_genes(a);
  const auto donor = to_genes(b);
  for (int g = first_cut; g < second_cut; ++g) child[static_cast<std::size_t>(g)] = donor[static_cast<std::size_t>(g)];
  return child;
}

StationDesign crossover_double_point(const StationDesign& a, const StationDesign& b, int first_cut, int second_cut,
                                     const DesignBounds& bounds, const StretchParams& stretch) {
  return project(crossover_genes(a, b, first_cut, second_cut), bounds, stretch);
}

namespace {

std::pair<int, int> draw_cuts(Rng& rng) {
  int first = static_cast<int>(rng.uniform_int(0, 4));
  int second = static_cast<int>(rng.uniform_int(0, 3));
  if (second >= first) ++second;
  if (first > second) std::swap(first, second);
  return {first, second};
}

}  // namespace

StationDesign crossover_double_point(const StationDesign& a, const StationDesign& b, const DesignBounds& bounds,
                                     const StretchParams& stretch, Rng& rng) {
  const auto [first, second] = draw_cuts(rng);
  return crossover_double_point(a, b, first, second, bounds, stretch);
}

StationDesign mutate(const StationDesign& design, const DesignBounds& bounds, const StretchParams& stretch,
                     double mutation_prob, Rng& rng) {
  StationDesign out = design;
  // Draw all three decisions first so the stream consumption does not
  // depend on the outcome.
  const bool placement = rng.bernoulli(mutation_prob);
  const bool service = rng.bernoulli(mutation_prob);
  const bool ratio = rng.bernoulli(mutation_prob);
  if (!placement && !service && !ratio) return out;
  const auto fresh = sample_uniform(bounds, stretch, rng);
  if (placement) {
    out.access_cell = fresh.access_cell;
    out.exit_cell = fresh.exit_cell;
  }
  if (service) out.service_minutes = fresh.service_minutes;
  if (ratio) {
    // Rescale the fresh draw onto the range allowed at the (possibly new) access cell.
    const double hi_fresh = max_station_ratio(bounds, stretch, fresh.access_cell);
    const double hi = max_station_ratio(bounds, stretch, out.access_cell);
    const double u = hi_fresh > bounds.min_ratio ? (fresh.station_ratio - bounds.min_ratio) / (hi_fresh - bounds.min_ratio) : 0.0;
    out.station_ratio = bounds.min_ratio + u * (hi - bounds.min_ratio);
  } else if (placement) {
    out.station_ratio = std::min(out.station_ratio, max_station_ratio(bounds, stretch, out.access_cell));
  }
  return out;
}

GARun run_ga(const CostEvaluator& evaluator, const DesignBounds& bounds, const GAConfig& config) {
  config.validate();
  const auto& stretch = evaluator.stretch();
  bounds.validate(stretch);
  if (admissible_access_cells(bounds, stretch).empty())
    throw ConfigError("feasible design set is empty: no admissible access cell");
  for (const auto& s : config.seed_designs)
    if (!is_feasible(s, bounds, stretch))
      throw ConfigError(fmt::format("seed design {} is not feasible", to_string(s)));

  const auto pop_size = static_cast<std::size_t>(config.population_size);
  const auto elites = static_cast<std::size_t>(config.elite_count);
  Rng rng(config.seed);
  std::map<StationDesign, double> cache;
  GARun run;

  auto evaluate = [&](std::vector<Individual>& population) {
    std::vector<StationDesign> pending;
    for (const auto& ind : population) {
      if (cache.contains(ind.design)) continue;
      if (config.infeasible == InfeasiblePolicy::penalty && !is_feasible(ind.design, bounds, stretch)) {
        cache.emplace(ind.design, kPenaltyFitness);
        continue;
      }
      if (std::find(pending.begin(), pending.end(), ind.design) == pending.end()) pending.push_back(ind.design);
    }
    std::vector<double> fitness(pending.size());
    parallel_for(pending.size(), config.jobs,
                 [&](std::size_t i) { fitness[i] = evaluate_fitness(pending[i], evaluator); });
    for (std::size_t i = 0; i < pending.size(); ++i) cache.emplace(pending[i], fitness[i]);
    run.evaluations_count += pending.size();
    for (auto& ind : population) ind.fitness = cache.at(ind.design);
    std::stable_sort(population.begin(), population.end(), [](const Individual& a, const Individual& b) {
      if (a.fitness != b.fitness) return a.fitness > b.fitness;
      return a.design < b.design;
    });
  };

  auto record = [&](const std::vector<Individual>& population) {
    double sum = 0.0;
    for (const auto& ind : population) sum += ind.fitness;
    ++run.generations_run;
    run.fitness_history.push_back(population.front().fitness);
    run.generations.push_back({run.generations_run, population.front().fitness,
                               sum / static_cast<double>(population.size()), population.front().design});
  };

  std::vector<Individual> population;
  population.reserve(pop_size);
  for (const auto& s : config.seed_designs) population.push_back({s, 0.0});
  while (population.size() < pop_size) population.push_back({sample_uniform(bounds, stretch, rng), 0.0});
  evaluate(population);
  record(population);

  int stagnant = 0;
  while (stagnant < config.stagnation_limit && run.generations_run < config.max_generations) {
    const double previous_best = population.front().fitness;
    std::vector<Individual> next(population.begin(), population.begin() + static_cast<std::ptrdiff_t>(elites));
    while (next.size() < pop_size) {
      const auto& a = population[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(elites) - 1))];
      const auto& b = population[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(elites) - 1))];
      const auto [first, second] = draw_cuts(rng);
      StationDesign child;
      if (config.infeasible == InfeasiblePolicy::repair) {
        child = crossover_double_point(a.design, b.design, first, second, bounds, stretch);
        child = mutate(child, bounds, stretch, config.mutation_prob, rng);
      } else {
        child = from_genes(crossover_genes(a.design, b.design, first, second));
        child = mutate(child, bounds, stretch, config.mutation_prob, rng);
      }
      next.push_back({child, 0.0});
    }
    population = std::move(next);
    evaluate(population);
    record(population);
    if (population.front().fitness > previous_best + kImprovementThreshold)
      stagnant = 0;
    else
      ++stagnant;
  }

  run.stopped_on_stagnation = stagnant >= config.stagnation_limit;
  run.best_design = population.front().design;
  run.best_cost = -population.front().fitness;
  return run;
}

GARun run_ga(const StretchParams& stretch, const FixedParams& fixed, const DemandProfile& profile,
             const DesignBounds& bounds, double alpha, const GAConfig& config) {
  const CostEvaluator evaluator(stretch, fixed, profile, alpha);
  return run_ga(evaluator, bounds, config);
}

void write_generation_log(std::ostream& out, const GARun& run) {
  out << "generation,best_fitness,mean_fitness,i,j,delta_min,beta_s\n";
  for (const auto& g : run.generations)
    out << fmt::format("{},{},{},{},{},{},{}\n", g.generation, g.best_fitness, g.mean_fitness,
                       g.best_design.access_cell, g.best_design.exit_cell, g.best_design.service_minutes,
                       g.best_design.station_ratio);
}

}  // namespace ctms
