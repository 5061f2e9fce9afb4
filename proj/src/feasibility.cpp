#include "toomqca/feasibility.hpp"

#include <cmath>

#include "toomqca/errors.hpp"

namespace toomqca {

double program_length_bound(int T0) {
  const double l = std::log2(static_cast<double>(T0));
  return l * l;
}

std::vector<std::string> check_feasibility(const ScheduleParams& params,
                                           const FeasibilityConstraints& c, int T_ref_min) {
  std::vector<std::string> failed;
  const int T0 = params.T0();
  if (T0 != params.T_ref + params.T_code) failed.push_back("T0 = T_ref + T_code");
  if (params.M < T0) failed.push_back("M >= T0");
  if (params.T_ref < T_ref_min) failed.push_back("T_ref >= T_ref_min");
  if (static_cast<double>(params.T_sim) < c.c_sim * params.M) failed.push_back("T_sim >= c_sim*M");
  if (static_cast<double>(params.M) < c.c_prog * program_length_bound(T0)) {
    failed.push_back("M >= c_prog*(log2 T0)^2");
  }
  const double d = c.c_dim * static_cast<double>(c.d_D) * T0 * params.M * params.M;
  if (std::llround(d) != params.d || params.d_D != c.d_D) {
    failed.push_back("d = c_dim*d_D*T0*M^2");
  }
  return failed;
}

FeasibilityResult solve_params(const FeasibilityConstraints& c, int T_ref_min,
                               std::optional<ScheduleParams> candidate) {
  if (c.d_D < 1 || c.c_sim < 1 || c.c_prog < 1 || c.c_dim < 1) {
    throw ConfigError("feasibility constants must all be at least 1");
  }
  FeasibilityResult res;
  if (candidate) {
    res.failed = check_feasibility(*candidate, c, T_ref_min);
    if (res.failed.empty()) {
      res.feasible = true;
      res.params = *candidate;
      res.d = candidate->d;
      res.message = "candidate already feasible";
      return res;
    }
  }
  ScheduleParams p;
  p.T_ref = T_ref_min;
  p.T_code = c.T_code;
  p.d_D = c.d_D;
  const int T0 = p.T0();
  const double prog = c.c_prog * program_length_bound(T0);
  for (int M = 1; M <= c.M_cap; ++M) {
    if (M < T0 || static_cast<double>(M) < prog) continue;
    p.M = M;
    p.T_sim = static_cast<int>(std::ceil(c.c_sim * M));
    p.d_S = static_cast<std::int64_t>(T0) * M * M;
    p.d = std::llround(c.c_dim * static_cast<double>(c.d_D) * T0 * M * M);
    res.failed = check_feasibility(p, c, T_ref_min);
    if (res.failed.empty()) {
      res.feasible = true;
      res.params = p;
      res.d = p.d;
      res.message = "consistent";
      return res;
    }
  }
  res.feasible = false;
  res.failed = {"M <= M_cap"};
  res.message = "infeasible within cap M <= " + std::to_string(c.M_cap);
  return res;
}

}  // namespace toomqca
