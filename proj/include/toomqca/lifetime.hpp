#pragma once

// Memory lifetime: steps until the global-majority readout of a stored 0
// flips, on an L x L torus.

#include <cstdint>
#include <string>
#include <vector>

#include "toomqca/lattice.hpp"
#include "toomqca/stats.hpp"

namespace toomqca {

enum class LifetimeRule : std::uint8_t {
  PlainToom,  // one classical bit per site, Toom majority, i.i.d. flips
  Qca,        // full cycle with the repetition table, structure and data noise
};

std::string to_string(LifetimeRule r);
LifetimeRule lifetime_rule_from_string(const std::string& s);

struct LifetimeConfig {
  std::vector<int> L;
  std::vector<double> p;
  std::uint64_t trials = 200;
  std::uint64_t cap = 100000;
  std::uint64_t seed = 1;
  LifetimeRule rule = LifetimeRule::PlainToom;
  ScheduleParams params;  // Qca only
};

struct LifetimeRow {
  int L = 0;
  double p = 0.0;
  std::uint64_t trial = 0;
  std::uint64_t lifetime = 0;  // equals cap when censored
  bool censored = false;
};

struct LifetimeSummary {
  int L = 0;
  double p = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t censored = 0;
  MedianEstimate median;
  int k_max = 0;
};

struct LifetimeResult {
  std::vector<LifetimeRow> rows;  // ordered by (L, p, trial)
  std::vector<LifetimeSummary> summaries;
};

// Largest level whose blocks fit: floor(log_M L), for M >= 2.
int k_max_levels(int L, int M);

// First step at which the majority of the bits is not 0 (a tie counts as a
// failure); cap when it never happens. Rows are bit-packed when L <= 64 or
// L is a multiple of 64.
std::uint64_t plain_toom_lifetime(int L, double p, std::uint64_t cap, std::uint64_t seed);

std::uint64_t qca_lifetime(int L, double p, std::uint64_t cap, std::uint64_t seed,
                           const ScheduleParams& params);

LifetimeResult lifetime_experiment(const LifetimeConfig& cfg);

}  // namespace toomqca
