#include "ctms/dataset.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "ctms/error.hpp"
#include "ctms/metrics.hpp"
#include "ctms/parallel.hpp"

namespace ctms {

namespace {

void check_interval(const Interval& r, const char* name, double floor) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
    throw ConfigError(fmt::format("{} range [{}, {}] is empty", name, r.lo, r.hi));
  if (r.lo <= floor) throw ConfigError(fmt::format("{} range must lie above {}, got [{}, {}]", name, floor, r.lo, r.hi));
}

double draw(const Interval& r, Rng& rng) { return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi); }

}  // namespace

void StretchRanges::validate() const {
  check_interval(length_m, "length_m", 0.0);
  check_interval(free_flow_speed, "free_flow", 0.0);
  check_interval(wave_speed, "wave", 0.0);
  check_interval(capacity, "capacity", 0.0);
  check_interval(jam_density, "jam", 0.0);
  if (wave_speed.lo >= free_flow_speed.hi)
    throw ConfigError(fmt::format("wave range [{}, {}] leaves no value below the free-flow range [{}, {}]",
                                  wave_speed.lo, wave_speed.hi, free_flow_speed.lo, free_flow_speed.hi));
  fixed.validate();
  if (fixed_ranges) {
    const auto& f = *fixed_ranges;
    if (!(f.mainstream_priority.lo >= 0.0 && f.mainstream_priority.hi <= 1.0 &&
          f.mainstream_priority.lo <= f.mainstream_priority.hi))
      throw ConfigError("mainstream_priority range must lie in [0, 1]");
    check_interval(f.ramp_capacity, "ramp_capacity", 0.0);
  }
  if (cells < 2) throw ConfigError(fmt::format("a stretch needs at least 2 cells, got {}", cells));
  if (count < 1) throw ConfigError("corpus count must be >= 1");
}

StretchParams random_stretch(const StretchRanges& ranges, Rng& rng) {
  ranges.validate();
  std::vector<CellParams> cells(static_cast<std::size_t>(ranges.cells));
  for (auto& c : cells) {
    do {
      c.length_km = draw(ranges.length_m, rng) / 1000.0;
      c.free_flow_speed = draw(ranges.free_flow_speed, rng);
      c.wave_speed = draw(ranges.wave_speed, rng);
      c.capacity = draw(ranges.capacity, rng);
      c.jam_density = draw(ranges.jam_density, rng);
      c.offramp_ratio = 0.0;
    } while (c.wave_speed >= c.free_flow_speed);
  }
  return StretchParams(std::move(cells));
}

FixedParams random_fixed(const StretchRanges& ranges, Rng& rng) {
  if (!ranges.fixed_ranges) return ranges.fixed;
  FixedParams f = ranges.fixed;
  f.mainstream_priority = draw(ranges.fixed_ranges->mainstream_priority, rng);
  f.ramp_capacity = draw(ranges.fixed_ranges->ramp_capacity, rng);
  return f;
}

StationDesign no_station_design(const DesignBounds& bounds, const StretchParams& stretch) {
  const auto access = admissible_access_cells(bounds, stretch);
  if (access.empty()) throw ConfigError("feasible design set is empty: no admissible access cell");
  return {access.front(), access.front() + bounds.span, bounds.min_service_minutes, 0.0};
}

DesignRecord build_record(const StretchRanges& ranges, const GAConfig& ga, const DemandProfile& profile, double alpha,
                          std::uint64_t master_seed, std::size_t index) {
  DesignRecord rec;
  rec.seed = derive_seed(master_seed, index);
  Rng rng(rec.seed);
  rec.stretch = random_stretch(ranges, rng);
  rec.fixed = random_fixed(ranges, rng);
  const auto bounds = DesignBounds::defaults(rec.fixed);

  const CostEvaluator evaluator(rec.stretch, rec.fixed, profile, alpha);
  GAConfig config = ga;
  config.seed = derive_seed(rec.seed, 0);
  config.seed_designs = {no_station_design(bounds, rec.stretch)};
  const auto run = run_ga(evaluator, bounds, config);

  const auto score = evaluator.score(run.best_design);
  rec.target = run.best_design;
  rec.cost = score.cost;
  rec.xi_delta_min = score.xi_delta_min;
  rec.pi_delta = score.pi_delta;
  return rec;
}

CorpusResult build_corpus(const StretchRanges& ranges, const GAConfig& ga, const DemandProfile& profile, double alpha,
                          std::uint64_t master_seed, int jobs, const std::function<void(std::size_t)>& progress) {
  ranges.validate();
  ga.validate();
  std::vector<std::optional<DesignRecord>> slots(ranges.count);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  GAConfig per_record = ga;
  per_record.jobs = 1;
  parallel_for(ranges.count, jobs, [&](std::size_t k) {
    try {
      slots[k] = build_record(ranges, per_record, profile, alpha, master_seed, k);
    } catch (const Error&) {
      slots[k].reset();
    }
    const auto finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished);
    }
  });
  CorpusResult result;
  for (auto& slot : slots) {
    if (slot)
      result.records.push_back(std::move(*slot));
    else
      ++result.failures;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::ordered_json;

ordered_json record_json(const DesignRecord& r) {
  ordered_json cells = ordered_json::array();
  for (const auto& c : r.stretch.cells())
    cells.push_back({c.length_km, c.free_flow_speed, c.wave_speed, c.capacity, c.jam_density, c.offramp_ratio});
  return {{"seed", r.seed},
          {"fixed", {r.fixed.mainstream_priority, r.fixed.ramp_capacity, r.fixed.station_cell_span}},
          {"cells", cells},
          {"target", {r.target.access_cell, r.target.exit_cell, r.target.service_minutes, r.target.station_ratio}},
          {"cost", r.cost},
          {"xi_delta_min", r.xi_delta_min},
          {"pi_delta", r.pi_delta}};
}

DesignRecord record_from_json(const nlohmann::json& j) {
  DesignRecord r;
  r.seed = j.at("seed").get<std::uint64_t>();
  const auto& f = j.at("fixed");
  if (!f.is_array() || f.size() != 3) throw ParseError("fixed: expected [p_ms, r_s_max, span]");
  r.fixed = {f[0].get<double>(), f[1].get<double>(), f[2].get<int>()};
  std::vector<CellParams> cells;
  for (const auto& c : j.at("cells")) {
    if (!c.is_array() || c.size() != 6) throw ParseError("cells: expected [L, v, w, q, rho, beta] per cell");
    cells.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>(), c[3].get<double>(),
                     c[4].get<double>(), c[5].get<double>()});
  }
  r.stretch = StretchParams(std::move(cells));
  const auto& t = j.at("target");
  if (!t.is_array() || t.size() != 4) throw ParseError("target: expected [i, j, delta_min, beta_s]");
  r.target = {t[0].get<int>(), t[1].get<int>(), t[2].get<double>(), t[3].get<double>()};
  r.cost = j.at("cost").get<double>();
  r.xi_delta_min = j.at("xi_delta_min").get<double>();
  r.pi_delta = j.at("pi_delta").get<double>();
  return r;
}

}  // namespace

void write_ndjson(std::ostream& out, const std::vector<DesignRecord>& records) {
  for (const auto& r : records) out << record_json(r).dump() << '\n';
}

std::vector<DesignRecord> read_ndjson(std::istream& in) {
  std::vector<DesignRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("corpus line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw ParseError(fmt::format("corpus line {}: {}", line_no, e.what()));
    }
  }
  return records;
}

void write_corpus_csv(std::ostream& out, const std::vector<DesignRecord>& records) {
  if (records.empty()) return;
  const auto n = records.front().stretch.size();
  std::string header;
  for (std::size_t c = 1; c <= n; ++c)
    header += fmt::format("L_{0},vff_{0},w_{0},qmax_{0},rhomax_{0},beta_{0},", c);
  header += "p_ms,r_s_max,span,i,j,delta_min,beta_s";
  out << header << '\n';
  for (const auto& r : records) {
    if (r.stretch.size() != n)
      throw DomainError(fmt::format("corpus mixes stretches of {} and {} cells", n, r.stretch.size()));
    std::string row;
    for (const auto& c : r.stretch.cells())
      row += fmt::format("{},{},{},{},{},{},", c.length_km, c.free_flow_speed, c.wave_speed, c.capacity,
                         c.jam_density, c.offramp_ratio);
    row += fmt::format("{},{},{},{},{},{},{}", r.fixed.mainstream_priority, r.fixed.ramp_capacity,
                       r.fixed.station_cell_span, r.target.access_cell, r.target.exit_cell,
                       r.target.service_minutes, r.target.station_ratio);
    out << row << '\n';
  }
}

}  // namespace ctms
