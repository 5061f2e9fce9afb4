#pragma once

// Search for scale constants satisfying the self-simulation constraints
//   M >= T0, T_ref >= T_ref_min, T_sim >= c_sim * M,
//   M >= c_prog * (log2 T0)^2, d = c_dim * d_D * T0 * M^2.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toomqca/lattice.hpp"

namespace toomqca {

struct FeasibilityConstraints {
  std::int64_t d_D = 12;
  double c_sim = 1.0;
  double c_prog = 1.0;
  double c_dim = 1.0;
  int T_code = 6;
  int M_cap = 1 << 20;
};

struct FeasibilityResult {
  bool feasible = false;
  ScheduleParams params;
  std::int64_t d = 0;
  std::vector<std::string> failed;  // names of inequalities that do not hold
  std::string message;
};

// Polylog bound used for the program-length condition.
double program_length_bound(int T0);

// Names of the violated inequalities; empty when all six hold.
std::vector<std::string> check_feasibility(const ScheduleParams& params,
                                           const FeasibilityConstraints& c, int T_ref_min);

// Increasing search over M. A feasible candidate is returned unchanged.
FeasibilityResult solve_params(const FeasibilityConstraints& c, int T_ref_min = 18,
                               std::optional<ScheduleParams> candidate = std::nullopt);

}  // namespace toomqca
