// Command-line front end: simulation, optimization, corpus generation,
// surrogate training and the case-study tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "ctms/bruteforce.hpp"
#include "ctms/dataset.hpp"
#include "ctms/error.hpp"
#include "ctms/ga.hpp"
#include "ctms/metrics.hpp"
#include "ctms/mlp.hpp"
#include "ctms/scenario.hpp"

#ifndef CTMS_VERSION
#define CTMS_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Bad command-line usage detected after parsing (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ctms::Error(fmt::format("{}: cannot read for hashing", path.string()));
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    EVP_DigestUpdate(ctx, buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  EVP_DigestFinal_ex(ctx, digest, &size);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < size; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

/// Resolved configuration, inputs and timings written next to each artifact.
class Manifest {
 public:
  Manifest(std::string subcommand, std::vector<std::string> argv)
      : start_(std::chrono::steady_clock::now()), wall_start_(std::chrono::system_clock::now()) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["version"] = CTMS_VERSION;
    doc_["argv"] = std::move(argv);
    doc_["config"] = ordered_json::object();
    doc_["seed"] = nullptr;
    doc_["inputs"] = ordered_json::array();
    doc_["outputs"] = ordered_json::array();
  }

  ordered_json& config() { return doc_["config"]; }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void input(const fs::path& path) {
    doc_["inputs"].push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }

  void write(const fs::path& artifact) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    doc_["timings"] = {{"started_unix_s", std::chrono::duration<double>(wall_start_.time_since_epoch()).count()},
                       {"wall_s", elapsed}};
    const fs::path path = artifact.string() + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw ctms::Error(fmt::format("{}: cannot write manifest", path.string()));
    out << doc_.dump(2) << '\n';
  }

 private:
  ordered_json doc_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::system_clock::time_point wall_start_;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ctms::Error(fmt::format("{}: cannot open for writing", path.string()));
  return out;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("{}: '{}' is not a number", flag, item));
    }
  }
  return values;
}

ctms::StationDesign parse_design(const std::string& text, const std::string& flag) {
  const auto v = parse_numbers(text, flag);
  if (v.size() != 4) throw UsageError(fmt::format("{} expects i,j,delta_min,beta_s, got '{}'", flag, text));
  if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
    throw UsageError(fmt::format("{}: cell indices must be integers, got '{}'", flag, text));
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), v[2], v[3]};
}

ordered_json design_json(const ctms::StationDesign& d) {
  return {{"i", d.access_cell}, {"j", d.exit_cell}, {"delta_min", d.service_minutes}, {"beta_s", d.station_ratio}};
}

ordered_json score_json(const ctms::DesignScore& s) {
  return {{"xi_delta_min", s.xi_delta_min}, {"pi_delta", s.pi_delta}, {"cost", s.cost}};
}

/// Flags shared by the scenario-driven subcommands.
struct Common {
  std::string scenario = "a2";
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::string out;
  int jobs = 1;

  void add_scenario(CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "Built-in scenario (a2, a4) or scenario JSON path")
        ->capture_default_str();
  }
  void add_seed(CLI::App* cmd) { cmd->add_option("--seed", seed, "Master seed (falls back to $CTMS_SEED)"); }
  void add_alpha(CLI::App* cmd) { cmd->add_option("--alpha", alpha, "Override the scenario's cost weight alpha"); }
  void add_out(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--out", out, "Output artifact path");
    if (required) opt->required();
  }
  void add_jobs(CLI::App* cmd) {
    cmd->add_option("--jobs", jobs, "Concurrent evaluations (0 = all cores)")->check(CLI::NonNegativeNumber);
  }

  std::uint64_t require_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("CTMS_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        const auto value = std::stoull(env, &used);
        if (used == std::string(env).size()) return value;
      } catch (const std::exception&) {
      }
      throw UsageError(fmt::format("CTMS_SEED='{}' is not an unsigned integer", env));
    }
    throw UsageError("this command is randomized: pass --seed or set CTMS_SEED");
  }

  ctms::Scenario load(Manifest& manifest) const {
    auto s = ctms::resolve_scenario(scenario);
    if (!ctms::builtin_scenario(scenario)) manifest.input(scenario);
    if (alpha) s.alpha = *alpha;
    manifest.config()["scenario"] = scenario;
    manifest.config()["alpha"] = s.alpha;
    manifest.config()["step_hours"] = s.step_hours;
    return s;
  }
};

void print_score_line(const std::string& label, const ctms::StationDesign& d, const ctms::DesignScore& s) {
  fmt::print("{:<12} i={:<3} j={:<3} delta={:>8.2f} min  beta_s={:.4f}  xi={:.3f} min  pi={:.4f}  cost={:.6f}\n",
             label, d.access_cell, d.exit_cell, d.service_minutes, d.station_ratio, s.xi_delta_min, s.pi_delta,
             s.cost);
}

// ---------------------------------------------------------------------------

int run_simulate(const Common& c, const std::optional<std::string>& design_text, const std::vector<std::string>& argv) {
  Manifest manifest("simulate", argv);
  const auto s = c.load(manifest);
  std::optional<ctms::StationDesign> design;
  if (design_text) design = parse_design(*design_text, "--design");
  manifest.config()["design"] = design ? design_json(*design) : ordered_json(nullptr);
  if (design && !ctms::is_feasible(*design, s.bounds, s.stretch))
    throw ctms::ConfigError(fmt::format("design {} is not feasible for scenario {}", ctms::to_string(*design), s.name));

  const auto profile = s.demand();
  const auto traj = ctms::simulate(s.stretch, design, s.fixed, profile);
  const auto delay = ctms::delay_series(traj, s.stretch);

  const fs::path out_path = c.out;
  {
    auto out = open_output(out_path);
    out << "step,t_h,cell,density,inflow,total_in,total_out,onramp,offramp,speed\n";
    for (std::size_t k = 0; k < traj.steps; ++k) {
      const double t = static_cast<double>(k) * traj.step_hours;
      for (std::size_t i = 0; i < traj.cells; ++i)
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", k, t, i + 1, traj.at(traj.density, k, i),
                           traj.at(traj.inflow, k, i), traj.at(traj.total_inflow, k, i),
                           traj.at(traj.total_outflow, k, i), traj.at(traj.onramp_flow, k, i),
                           traj.at(traj.offramp_flow, k, i), traj.at(traj.speed, k, i));
    }
  }
  manifest.output(out_path);
  const fs::path series_path = out_path.parent_path() / (out_path.stem().string() + "_series.csv");
  {
    auto out = open_output(series_path);
    out << "step,t_h,offered_inflow,outflow,delay_h,station_entry,station_exit,station_count,exit_queue\n";
    for (std::size_t k = 0; k < traj.steps; ++k)
      out << fmt::format("{},{},{},{},{},{},{},{},{}\n", k, static_cast<double>(k) * traj.step_hours,
                         traj.offered_inflow[k], traj.outflow[k], delay[k], traj.station_entry[k],
                         traj.station_exit[k], traj.station_count[k], traj.exit_queue[k]);
  }
  manifest.output(series_path);

  const ctms::CostEvaluator evaluator(s.stretch, s.fixed, profile, s.alpha);
  const auto report = evaluator.report(design);
  fmt::print("scenario {}: {} cells, {} steps of {} h\n", s.name, s.stretch.size(), traj.steps, traj.step_hours);
  fmt::print("baseline xi={:.3f} min, peak delay={:.3f} min\n", evaluator.baseline_xi(),
             evaluator.baseline_peak() * 60.0);
  if (design) print_score_line("design", *design, report.score());
  if (report.no_baseline_congestion) fmt::print("note: the no-station baseline never congests; pi is 0\n");
  fmt::print("wrote {} and {}\n", out_path.string(), series_path.string());
  manifest.write(out_path);
  return 0;
}

int run_optimize_ga(const Common& c, ctms::GAConfig ga, const std::string& log_path,
                    const std::vector<std::string>& seed_designs, const std::vector<int>& excluded,
                    const std::vector<std::string>& argv) {
  Manifest manifest("optimize-ga", argv);
  ga.seed = c.require_seed();
  ga.jobs = c.jobs;
  manifest.seed(ga.seed);
  auto s = c.load(manifest);
  s.bounds.excluded_cells.insert(excluded.begin(), excluded.end());
  for (const auto& text : seed_designs) ga.seed_designs.push_back(parse_design(text, "--seed-design"));
  manifest.config()["ga"] = {{"population_size", ga.population_size},
                             {"elite_count", ga.elite_count},
                             {"mutation_prob", ga.mutation_prob},
                             {"stagnation_limit", ga.stagnation_limit},
                             {"max_generations", ga.max_generations},
                             {"infeasible", ga.infeasible == ctms::InfeasiblePolicy::repair ? "repair" : "penalty"}};
  manifest.config()["seed_designs"] = seed_designs;
  manifest.config()["exclude_cells"] = excluded;

  const ctms::CostEvaluator evaluator(s.stretch, s.fixed, s.demand(), s.alpha);
  const auto run = ctms::run_ga(evaluator, s.bounds, ga);
  const auto score = evaluator.score(run.best_design);

  ordered_json result{{"scenario", s.name},
                      {"seed", ga.seed},
                      {"best", design_json(run.best_design)},
                      {"score", score_json(score)},
                      {"generations_run", run.generations_run},
                      {"evaluations", run.evaluations_count},
                      {"stopped_on_stagnation", run.stopped_on_stagnation},
                      {"fitness_history", run.fitness_history}};
  const fs::path out_path = c.out;
  open_output(out_path) << result.dump(2) << '\n';
  manifest.output(out_path);
  if (!log_path.empty()) {
    auto log = open_output(log_path);
    ctms::write_generation_log(log, run);
    manifest.output(log_path);
  }
  print_score_line("S*_GA", run.best_design, score);
  fmt::print("{} generations, {} simulations{}\n", run.generations_run, run.evaluations_count,
             run.stopped_on_stagnation ? ", stopped on stagnation" : "");
  manifest.write(out_path);
  return 0;
}

int run_optimize_bf(const Common& c, const ctms::GridSpec& grid, const std::vector<int>& excluded,
                    const std::vector<std::string>& argv) {
  Manifest manifest("optimize-bf", argv);
  auto s = c.load(manifest);
  s.bounds.excluded_cells.insert(excluded.begin(), excluded.end());
  manifest.config()["grid_delta_step"] = grid.delta_step_min;
  manifest.config()["grid_ratio_step"] = grid.ratio_step;
  manifest.config()["exclude_cells"] = excluded;

  const ctms::CostEvaluator evaluator(s.stretch, s.fixed, s.demand(), s.alpha);
  const auto result = ctms::brute_force_search(evaluator, s.bounds, grid, c.jobs);
  const fs::path out_path = c.out;
  {
    auto out = open_output(out_path);
    ctms::write_cost_table(out, result);
  }
  manifest.output(out_path);
  print_score_line("S*_BF", result.best, evaluator.score(result.best));
  fmt::print("{} grid designs evaluated\n", result.table.size());
  manifest.write(out_path);
  return 0;
}

int run_gen_dataset(const Common& c, ctms::StretchRanges ranges, bool vary_fixed, double profile_step,
                    const std::string& csv_path, const std::vector<std::string>& argv) {
  Manifest manifest("gen-dataset", argv);
  const auto seed = c.require_seed();
  manifest.seed(seed);
  if (vary_fixed) ranges.fixed_ranges = ctms::FixedRanges{};
  const double alpha = c.alpha.value_or(0.01);
  manifest.config()["count"] = ranges.count;
  manifest.config()["cells"] = ranges.cells;
  manifest.config()["alpha"] = alpha;
  manifest.config()["profile_step_hours"] = profile_step;
  manifest.config()["vary_fixed"] = vary_fixed;
  manifest.config()["ranges"] = {{"length_m", {ranges.length_m.lo, ranges.length_m.hi}},
                                 {"free_flow", {ranges.free_flow_speed.lo, ranges.free_flow_speed.hi}},
                                 {"wave", {ranges.wave_speed.lo, ranges.wave_speed.hi}},
                                 {"capacity", {ranges.capacity.lo, ranges.capacity.hi}},
                                 {"jam", {ranges.jam_density.lo, ranges.jam_density.hi}}};

  const auto profile = ctms::synthesize_profile(ctms::BimodalProfileSpec{}, profile_step);
  const auto start = std::chrono::steady_clock::now();
  const auto corpus = ctms::build_corpus(ranges, ctms::GAConfig{}, profile, alpha, seed, c.jobs, [&](std::size_t done) {
    if (done % 50 == 0 || done == ranges.count) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cerr << fmt::format("\r{}/{} records ({:.1f} s)", done, ranges.count, secs) << std::flush;
    }
  });
  std::cerr << '\n';
  const fs::path out_path = c.out;
  {
    auto out = open_output(out_path);
    ctms::write_ndjson(out, corpus.records);
  }
  manifest.output(out_path);
  if (!csv_path.empty()) {
    auto out = open_output(csv_path);
    ctms::write_corpus_csv(out, corpus.records);
    manifest.output(csv_path);
  }
  manifest.config()["failures"] = corpus.failures;
  fmt::print("{} records written to {}", corpus.records.size(), out_path.string());
  if (corpus.failures > 0) fmt::print(" ({} stretches failed and were skipped)", corpus.failures);
  fmt::print("\n");
  manifest.write(out_path);
  return 0;
}

int run_train_nn(const Common& c, ctms::TrainConfig config, const std::string& corpus_path,
                 const std::string& loss_path, const std::vector<std::string>& argv) {
  Manifest manifest("train-nn", argv);
  config.seed = c.require_seed();
  manifest.seed(config.seed);
  manifest.input(corpus_path);
  manifest.config()["corpus"] = corpus_path;
  manifest.config()["batch"] = config.batch_size;
  manifest.config()["epochs"] = config.epochs;
  manifest.config()["learning_rate"] = config.learning_rate;
  manifest.config()["validation_fraction"] = config.validation_fraction;
  manifest.config()["hidden"] = config.hidden_dim;
  manifest.config()["dropout"] = config.dropout_rate;

  std::ifstream in(corpus_path);
  if (!in) throw ctms::ParseError(fmt::format("{}: cannot open corpus", corpus_path));
  const auto corpus = ctms::read_ndjson(in);
  if (corpus.empty()) throw ctms::ConfigError(fmt::format("{}: corpus is empty", corpus_path));
  const auto result = ctms::train(corpus, config);
  if (result.warnings.size() > 3)
    fmt::print(stderr, "warning: {} degenerate scaler dimensions: {}\n", result.warnings.size(),
               fmt::join(result.warnings, "; "));
  else
    for (const auto& w : result.warnings) fmt::print(stderr, "warning: {}\n", w);

  const fs::path out_path = c.out;
  ctms::save_model(result.model, out_path);
  manifest.output(out_path);
  const fs::path curve = loss_path.empty() ? fs::path(out_path.string() + ".loss.csv") : fs::path(loss_path);
  {
    auto out = open_output(curve);
    ctms::write_loss_csv(out, result);
  }
  manifest.output(curve);
  fmt::print("trained on {} records ({} held out): train MSLE {:.5f}, validation MSLE {:.5f}\n",
             corpus.size() - result.validation_indices.size(), result.validation_indices.size(),
             result.train_loss.back(), result.validation_loss.back());
  manifest.write(out_path);
  return 0;
}

int run_predict_nn(const Common& c, const std::string& model_path, const std::vector<std::string>& argv) {
  Manifest manifest("predict-nn", argv);
  manifest.input(model_path);
  manifest.config()["model"] = model_path;
  const auto s = c.load(manifest);
  const auto model = ctms::load_model(model_path);
  const auto start = std::chrono::steady_clock::now();
  const auto design = ctms::predict(model, s.stretch, s.fixed, s.bounds);
  const double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const ctms::CostEvaluator evaluator(s.stretch, s.fixed, s.demand(), s.alpha);
  const auto score = evaluator.score(design);
  print_score_line("S*_NN", design, score);
  fmt::print("inference took {:.3f} ms\n", latency * 1e3);
  if (!c.out.empty()) {
    const fs::path out_path = c.out;
    open_output(out_path) << ordered_json{{"scenario", s.name}, {"design", design_json(design)},
                                          {"score", score_json(score)}}
                                 .dump(2)
                          << '\n';
    manifest.output(out_path);
    manifest.write(out_path);
  }
  return 0;
}

void print_table(const std::vector<ctms::ComparisonRow>& rows) {
  std::size_t width = 12;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  fmt::print("{:<{}} {:>3} {:>3} {:>10} {:>8} {:>12} {:>9} {:>10}\n", "", width, "i", "j", "delta[min]", "beta_s",
             "xi[min]", "pi", "cost");
  for (const auto& r : rows)
    fmt::print("{:<{}} {:>3} {:>3} {:>10.2f} {:>8.4f} {:>12.3f} {:>9.4f} {:>10.5f}\n", r.name, width,
               r.design.access_cell, r.design.exit_cell, r.design.service_minutes, r.design.station_ratio,
               r.score.xi_delta_min, r.score.pi_delta, r.score.cost);
}

int run_case_study(const Common& c, const std::string& which, const std::vector<int>& excluded,
                   const std::vector<std::string>& argv) {
  Manifest manifest("case-study", argv);
  const auto seed = c.require_seed();
  manifest.seed(seed);
  auto s = ctms::builtin_scenario(which);
  if (!s) throw UsageError(fmt::format("case-study expects a2 or a4, got '{}'", which));
  if (c.alpha) s->alpha = *c.alpha;
  manifest.config()["scenario"] = which;
  manifest.config()["alpha"] = s->alpha;
  manifest.config()["exclude_cells"] = excluded;

  ctms::CaseStudyOptions options;
  options.ga.seed = seed;
  options.ga.jobs = c.jobs;
  options.excluded_cells = {excluded.begin(), excluded.end()};
  const auto result = ctms::run_case_study(*s, options);

  fmt::print("case study {} ({} cells, synthetic bimodal demand){}\n", s->name, s->stretch.size(),
             excluded.empty() ? "" : fmt::format(", cells {} excluded", fmt::join(excluded, ",")));
  print_table(result.rows);
  fmt::print("optimum found in {} GA run(s)\n", result.ga_runs.size());
  const fs::path out_path = c.out.empty() ? fs::path(fmt::format("case_study_{}.csv", which)) : fs::path(c.out);
  {
    auto out = open_output(out_path);
    ctms::write_comparison_csv(out, result.rows);
  }
  manifest.output(out_path);
  manifest.write(out_path);
  return 0;
}

int run_compare(const Common& c, const std::vector<std::string>& designs, const std::string& reference,
                const std::string& optimum, const std::vector<std::string>& argv) {
  Manifest manifest("compare", argv);
  const auto s = c.load(manifest);
  const ctms::CostEvaluator evaluator(s.stretch, s.fixed, s.demand(), s.alpha);
  std::vector<ctms::ComparisonRow> rows;
  if (!optimum.empty()) {
    ctms::StationDesign ref;
    if (!reference.empty()) {
      ref = parse_design(reference, "--reference");
    } else if (const auto* r = s.reference("S_real")) {
      ref = *r;
    } else {
      throw UsageError("--optimum needs --reference when the scenario has no S_real design");
    }
    rows = ctms::compare_with_optimum(s, ref, parse_design(optimum, "--optimum"), evaluator);
  }
  std::vector<ctms::NamedDesign> named;
  for (const auto& text : designs) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("--design expects name=i,j,delta_min,beta_s, got '{}'", text));
    named.push_back({text.substr(0, eq), parse_design(text.substr(eq + 1), "--design")});
  }
  if (designs.empty() && optimum.empty()) named = s.reference_designs;
  const auto extra = ctms::compare_designs(s, named, evaluator);
  rows.insert(rows.end(), extra.begin(), extra.end());
  manifest.config()["designs"] = designs;
  manifest.config()["reference"] = reference;
  manifest.config()["optimum"] = optimum;

  print_table(rows);
  const fs::path out_path = c.out.empty() ? fs::path("comparison.csv") : fs::path(c.out);
  {
    auto out = open_output(out_path);
    ctms::write_comparison_csv(out, rows);
  }
  manifest.output(out_path);
  manifest.write(out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Highway service-station design: CTM-s simulation, GA/brute-force optimization and a neural surrogate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CTMS_VERSION);

  Common common;
  std::function<int()> action;

  // simulate
  std::optional<std::string> design_text;
  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario and write the trajectory CSV");
  common.add_scenario(simulate);
  common.add_alpha(simulate);
  common.add_out(simulate);
  simulate->add_option("--design", design_text, "Station design i,j,delta_min,beta_s (omit for no station)");
  simulate->callback([&] { action = [&] { return run_simulate(common, design_text, args); }; });

  // optimize-ga
  ctms::GAConfig ga;
  std::string ga_log;
  std::vector<std::string> seed_designs;
  std::vector<int> excluded;
  std::string infeasible = "repair";
  auto* optimize_ga = app.add_subcommand("optimize-ga", "Genetic-algorithm search for the optimal station");
  common.add_scenario(optimize_ga);
  common.add_seed(optimize_ga);
  common.add_alpha(optimize_ga);
  common.add_out(optimize_ga);
  common.add_jobs(optimize_ga);
  optimize_ga->add_option("--population", ga.population_size, "Population size")->capture_default_str();
  optimize_ga->add_option("--elites", ga.elite_count, "Elite count")->capture_default_str();
  optimize_ga->add_option("--mutation", ga.mutation_prob, "Per-gene mutation probability")->capture_default_str();
  optimize_ga->add_option("--stagnation", ga.stagnation_limit, "Generations without improvement before stopping")
      ->capture_default_str();
  optimize_ga->add_option("--max-generations", ga.max_generations, "Generation cap")->capture_default_str();
  optimize_ga->add_option("--infeasible", infeasible, "Offspring outside the bounds: repair or penalty")
      ->check(CLI::IsMember({"repair", "penalty"}))
      ->capture_default_str();
  optimize_ga->add_option("--seed-design", seed_designs, "Design i,j,delta_min,beta_s injected into generation 1");
  optimize_ga->add_option("--exclude-cells", excluded, "Cells barred as access or exit")->delimiter(',');
  optimize_ga->add_option("--log", ga_log, "Per-generation CSV log");
  optimize_ga->callback([&] {
    ga.infeasible = infeasible == "repair" ? ctms::InfeasiblePolicy::repair : ctms::InfeasiblePolicy::penalty;
    action = [&] { return run_optimize_ga(common, ga, ga_log, seed_designs, excluded, args); };
  });

  // optimize-bf
  ctms::GridSpec grid;
  auto* optimize_bf = app.add_subcommand("optimize-bf", "Exhaustive grid search (brute-force oracle)");
  common.add_scenario(optimize_bf);
  common.add_alpha(optimize_bf);
  common.add_out(optimize_bf);
  common.add_jobs(optimize_bf);
  optimize_bf->add_option("--grid-delta-step", grid.delta_step_min, "Service-time lattice step [min]")
      ->capture_default_str();
  optimize_bf->add_option("--grid-ratio-step", grid.ratio_step, "Station-ratio lattice step")->capture_default_str();
  optimize_bf->add_option("--exclude-cells", excluded, "Cells barred as access or exit")->delimiter(',');
  optimize_bf->callback([&] { action = [&] { return run_optimize_bf(common, grid, excluded, args); }; });

  // gen-dataset
  ctms::StretchRanges ranges;
  bool vary_fixed = false;
  double profile_step = 0.0025;
  std::string corpus_csv;
  auto* gen = app.add_subcommand("gen-dataset", "Generate a (stretch, F, optimal design) training corpus");
  common.add_seed(gen);
  common.add_alpha(gen);
  common.add_out(gen);
  common.add_jobs(gen);
  gen->add_option("--count", ranges.count, "Number of random stretches")->required();
  gen->add_option("--cells", ranges.cells, "Cells per stretch")->capture_default_str();
  gen->add_option("--csv", corpus_csv, "Also write a flat CSV export");
  gen->add_option("--profile-step", profile_step, "Simulation step of the shared demand profile [h]")
      ->capture_default_str();
  gen->add_flag("--vary-fixed", vary_fixed, "Draw p_ms and r_s_max per record instead of using the defaults");
  gen->callback([&] { action = [&] { return run_gen_dataset(common, ranges, vary_fixed, profile_step, corpus_csv, args); }; });

  // train-nn
  ctms::TrainConfig train;
  std::string corpus_path, loss_csv;
  auto* train_nn = app.add_subcommand("train-nn", "Train the neural surrogate on a corpus");
  common.add_seed(train_nn);
  common.add_out(train_nn);
  train_nn->add_option("--corpus", corpus_path, "Corpus NDJSON")->required();
  train_nn->add_option("--batch", train.batch_size, "Mini-batch size")->capture_default_str();
  train_nn->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
  train_nn->add_option("--learning-rate", train.learning_rate, "Initial Adam step")->capture_default_str();
  train_nn->add_option("--validation", train.validation_fraction, "Held-out fraction")->capture_default_str();
  train_nn->add_option("--loss-csv", loss_csv, "Per-epoch loss curve (default <out>.loss.csv)");
  train_nn->callback([&] { action = [&] { return run_train_nn(common, train, corpus_path, loss_csv, args); }; });

  // predict-nn
  std::string model_path;
  auto* predict_nn = app.add_subcommand("predict-nn", "Predict the optimal station with a trained model");
  common.add_scenario(predict_nn);
  common.add_alpha(predict_nn);
  common.add_out(predict_nn, false);
  predict_nn->add_option("--model", model_path, "Model JSON")->required();
  predict_nn->callback([&] { action = [&] { return run_predict_nn(common, model_path, args); }; });

  // case-study
  std::string which;
  auto* case_study = app.add_subcommand("case-study", "Reference vs. optimal vs. mixed designs on A2 or A4");
  case_study->add_option("scenario", which, "a2 or a4")->required();
  common.add_seed(case_study);
  common.add_alpha(case_study);
  common.add_out(case_study, false);
  common.add_jobs(case_study);
  case_study->add_option("--exclude-cells", excluded, "Cells barred as access or exit")->delimiter(',');
  case_study->callback([&] { action = [&] { return run_case_study(common, which, excluded, args); }; });

  // compare
  std::vector<std::string> compare_designs;
  std::string reference, optimum;
  auto* compare = app.add_subcommand("compare", "Score named designs on a scenario");
  common.add_scenario(compare);
  common.add_alpha(compare);
  common.add_out(compare, false);
  compare->add_option("--design", compare_designs, "name=i,j,delta_min,beta_s (repeatable)");
  compare->add_option("--reference", reference, "Reference design for the mixed rows");
  compare->add_option("--optimum", optimum, "Optimal design: adds S_real, S_behavior, S_placement, S_star rows");
  compare->callback([&] { action = [&] { return run_compare(common, compare_designs, reference, optimum, args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    fmt::print(stderr, "usage error: {}\n\n{}", e.what(), app.help());
    return 2;
  } catch (const ctms::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
