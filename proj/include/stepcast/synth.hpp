#pragma once

#include <cstdint>
#include <vector>

#include "stepcast/records.hpp"

namespace stepcast {

// Desk-scale synthetic corpus configuration. The generator reproduces the
// idiosyncrasies of device-reported step streams: duplicate records from
// overlapping sources, no-wear days with no records at all, abnormal-total
// outlier days, and coarse multi-hour records.
struct SynthConfig {
  int n_users = 10;
  int n_days = 30;
  uint64_t seed = 0;
  double duplicate_rate = 0.0;     // per record
  double outlier_day_rate = 0.0;   // per user-day
  double nowear_day_rate = 0.0;    // per user-day
  double coarse_record_rate = 0.0; // per user-day

  void validate() const;  // throws std::invalid_argument
};

// First calendar day of every generated corpus (a Monday).
inline constexpr Date kSynthBaseDate{2015, 3, 2};

// Deterministic: a pure function of the config, byte-identical across runs.
// Users are generated independently from per-user seeds derived from
// (seed, user index), so the corpus is stable under per-user parallelism.
std::vector<RawRecord> generate_synthetic_corpus(const SynthConfig& config);

}  // namespace stepcast
