#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ctms/design_space.hpp"
#include "ctms/ga.hpp"
#include "ctms/model.hpp"
#include "ctms/rng.hpp"

namespace ctms {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Optional variation of F across the corpus; the span stays fixed because
/// the design bounds depend on it.
struct FixedRanges {
  Interval mainstream_priority{0.9, 1.0};
  Interval ramp_capacity{1200.0, 1800.0};

  bool operator==(const FixedRanges&) const = default;
};

/// Generator ranges for random stretches. Lengths are drawn in metres and
/// stored in km, like every StretchParams.
struct StretchRanges {
  Interval length_m{300.0, 1000.0};
  Interval free_flow_speed{80.0, 110.0};
  Interval wave_speed{10.0, 40.0};
  Interval capacity{1500.0, 2500.0};
  Interval jam_density{70.0, 100.0};
  FixedParams fixed;
  std::optional<FixedRanges> fixed_ranges;  ///< nullopt: every record uses `fixed`
  int cells = 15;
  std::size_t count = 1;

  /// Throws ConfigError on empty or non-physical ranges.
  void validate() const;
};

/// N cells with independent uniform parameters and no ramps (β = 0). A cell
/// whose wave speed is not below its free-flow speed is redrawn.
StretchParams random_stretch(const StretchRanges& ranges, Rng& rng);
FixedParams random_fixed(const StretchRanges& ranges, Rng& rng);

/// One training tuple (P, F, S★) with the GA's score of the target.
struct DesignRecord {
  StretchParams stretch;
  FixedParams fixed;
  StationDesign target;
  double cost = 0.0;
  double xi_delta_min = 0.0;
  double pi_delta = 0.0;
  std::uint64_t seed = 0;  ///< record seed: regenerates the stretch and the GA run

  bool operator==(const DesignRecord&) const = default;
};

struct CorpusResult {
  std::vector<DesignRecord> records;  ///< in index order, failures omitted
  std::size_t failures = 0;
};

/// Record k draws its stretch from derive_seed(master_seed, k) and runs the
/// GA on it, seeded with the no-station design so the target never scores
/// worse than leaving the station out. `ga.seed` is ignored; each record
/// gets its own GA seed. Records are independent, so `jobs` only changes
/// the wall time. A record whose GA throws is counted in `failures`.
CorpusResult build_corpus(const StretchRanges& ranges, const GAConfig& ga, const DemandProfile& profile, double alpha,
                          std::uint64_t master_seed, int jobs = 1,
                          const std::function<void(std::size_t done)>& progress = {});

/// Regenerates record `index` of a corpus; throws whatever the GA throws.
DesignRecord build_record(const StretchRanges& ranges, const GAConfig& ga, const DemandProfile& profile, double alpha,
                          std::uint64_t master_seed, std::size_t index);

/// The no-station design: first admissible access cell, βˢ = 0.
StationDesign no_station_design(const DesignBounds& bounds, const StretchParams& stretch);

/// Newline-delimited JSON, one record per line.
void write_ndjson(std::ostream& out, const std::vector<DesignRecord>& records);
/// Throws ParseError naming the line of a malformed record.
std::vector<DesignRecord> read_ndjson(std::istream& in);

/// Flat export: 6N stretch features, 3 F features, 4 targets per row.
void write_corpus_csv(std::ostream& out, const std::vector<DesignRecord>& records);

}  // namespace ctms
