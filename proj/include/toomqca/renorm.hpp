#pragma once

// exRec bookkeeping on the structure layer and the level-to-level noise
// recursion.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toomqca/lattice.hpp"
#include "toomqca/noise.hpp"
#include "toomqca/schedule.hpp"
#include "toomqca/stats.hpp"

namespace toomqca {

// Block (I, J) over steps [t_start + m*T0, t_start + (m+1)*T0).
struct ExRecId {
  int level = 1;
  int I = 0;
  int J = 0;
  int m = 0;
  friend auto operator<=>(const ExRecId&, const ExRecId&) = default;
};

struct ExRecGeometry {
  ScheduleParams params;
  int n = 0;
  std::int64_t t_start = 0;
  int slices = 1;

  int blocks() const { return n / params.M; }
  std::size_t count() const {
    return static_cast<std::size_t>(slices) * blocks() * blocks();
  }
  std::size_t index(const ExRecId& id) const {
    return (static_cast<std::size_t>(id.m) * blocks() + id.I) * blocks() + id.J;
  }
  ExRecId id(std::size_t k) const {
    const auto B = static_cast<std::size_t>(blocks());
    return {1, static_cast<int>(k / B % B), static_cast<int>(k % B), static_cast<int>(k / (B * B))};
  }
};

// {self, north, east}; throws ConfigError (unsupported geometry) if M < T0.
std::vector<ExRecId> influence_neighborhood(const ExRecId& id, const ExRecGeometry& geo);

enum class PartitionOrder : std::uint8_t { Simultaneous, Sequential };

struct ExRecPartition {
  std::vector<long> owner;       // per event: exRec index, -1 outside the window
  std::vector<long> geometric;   // per event: owner before truncation
  std::vector<int> faults;       // per exRec: assigned events
  std::vector<bool> bad;         // per exRec, at the fixpoint
  int rounds = 0;
};

// Assigns each event to the exRec of its owning site, then moves
// block-crossing events out of exRecs that are not bad into a bad exRec they
// touch (lowest index first), repeating until nothing changes. Here an exRec
// is bad when its own initial cluster count plus geometrically assigned
// events exceeds t_EC_S; badness is sticky. `health` holds the initial cluster count of
// every exRec. Good/bad over influence neighbourhoods is decided afterwards
// by classify_exrec.
ExRecPartition partition_exrecs(const FaultPath& path, const ExRecGeometry& geo,
                                std::span<const int> health, int t_EC_S,
                                PartitionOrder order = PartitionOrder::Simultaneous);

struct ExRecReport {
  ExRecId id;
  int h = 0;  // max initial cluster count over the neighbourhood
  int r = 0;  // assigned faults over the neighbourhood
  bool good = true;
  bool direct_bad = false;  // own h + own r > t_EC_S
  std::vector<std::size_t> truncated_locations;  // events moved into this exRec
};

ExRecReport classify_exrec(const ExRecId& id, const ExRecPartition& part,
                           const ExRecGeometry& geo, std::span<const int> health, int t_EC_S);

// Cluster count of every block of `lattice`, relative to the ideal codeword
// at its global time, for slice m (other slices untouched).
void block_health(const LatticeState& lattice, const ExRecGeometry& geo, int m,
                  std::span<int> health, int limit);

// The exRec's output block, read at the lattice's global time, holds at
// most t_EC_S clusters.
bool verify_good_correct(const ExRecId& id, const LatticeState& output, int t_EC_S);

struct ClosenessConfig {
  ScheduleParams params;  // defaults: M = T0 = 24, T_ref = 18, w = 3, t_EC_S = 6
  int blocks = 2;
  int t_EC_S = 6;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
};

struct ClosenessResult {
  std::uint64_t samples = 0;
  std::uint64_t passed = 0;
  int worst_output_clusters = 0;
  std::uint64_t first_failure = 0;  // sample index, valid when passed < samples
};

// Places h random clusters at exRec start and r single-operation faults
// inside the neighbourhood of block (0, 0), with h + r <= t_EC_S, runs one
// T0 period of noiseless-otherwise structural Toom and checks the output.
ClosenessResult closeness_sweep(const ClosenessConfig& cfg);

struct LevelNoiseConfig {
  ScheduleParams params = [] {
    ScheduleParams p;
    p.M = 4;
    p.T_ref = 3;
    p.T_code = 1;
    p.w = 1;
    p.t_EC_S = 1;
    return p;
  }();
  int blocks = 4;
  int slices = 8;
  int t_EC_S = 1;
  std::vector<double> p_grid;
  std::uint64_t min_events = 50;
  std::uint64_t max_trials = 200000;
  std::uint64_t batch = 512;
  std::uint64_t seed = 1;
};

struct LevelNoisePoint {
  double p = 0.0;
  double eta = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t exrecs = 0;
  std::uint64_t direct_bad = 0;
  std::uint64_t bad = 0;
  Estimate P_direct_bad;
  Estimate P_bad;
  bool one_sided = false;  // no events: only the upper bound is meaningful
  bool retained = false;   // at least min_events direct_bad events
};

struct LevelNoiseEstimate {
  std::vector<LevelNoisePoint> points;
  int t_EC_S = 1;
  int R = 3;
  LinearFit probability_fit;  // log P[direct_bad] against log eta
  // Slope in the strength convention: the effective strength of a
  // directly bad exRec is sqrt(P), so this is half the probability slope.
  double strength_slope = 0.0;
  double strength_slope_se = 0.0;
  double A_tilde = 0.0;  // sqrt(P) ~ A_tilde * eta^(t_EC_S+1)
};

LevelNoiseEstimate estimate_level_noise(const LevelNoiseConfig& cfg);

// Derived column: (A_tilde * eta^(t_EC_S+1))^(1/R).
double rooted_strength(const LevelNoiseEstimate& est, double eta);

struct CBoundConfig {
  ScheduleParams params;
  CycleConfig cycle;
  int blocks = 1;
  int inject_tau = 0;  // step of the cycle after which the cluster appears
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
};

// Runs one cycle per trial with one random cluster injected at inject_tau
// and returns the maximum count_C_bound seen.
std::uint64_t c_bound_experiment(const CBoundConfig& cfg);

struct RenormFlow {
  double A = 0.0;
  int t_EC = 1;
  double eta0 = 0.0;
  int k = 0;
  double eta_th = 0.0;
  std::vector<double> log10_eta;  // per level 0..k, from the iterated recursion
  std::vector<double> eta;        // same, as plain doubles (may underflow to 0)
  double log10_eta_log = 0.0;
  double log10_closed_form = 0.0;
  double max_rel_error = 0.0;     // iterate vs closed form over all levels
  bool suppressing = false;       // eta0 < eta_th
  std::optional<double> A_S;
  std::optional<double> A_S_tilde;
  int k0 = 0;
  double N = 0.0, D = 0.0, delta = 0.0;
};

RenormFlow renorm_flow(double eta0, double A, int t_EC, int k);

// Smallest k with N*D*eta_k <= delta; nullopt when eta0 >= eta_th and the
// condition does not already hold at k = 0.
std::optional<int> required_levels(double N, double D, double delta, double eta0, double A,
                                   int t_EC);

}  // namespace toomqca
