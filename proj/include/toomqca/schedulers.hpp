#pragma once

// Three execution regimes over the same site rule: synchronous steps,
// asynchronous marching-soldier updates and continuous-time Poisson jumps.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "toomqca/lattice.hpp"
#include "toomqca/noise.hpp"
#include "toomqca/schedule.hpp"
#include "toomqca/stats.hpp"

namespace toomqca {

struct SyncOptions {
  CycleConfig cycle;  // cycle.rule selects structural Toom only or the full cycle
  int snapshot_stride = 0;  // 0: no snapshots
};

struct SyncTrajectory {
  LatticeState final_state;
  std::vector<LatticeState> snapshots;  // taken every stride steps, initial state first
  FaultPath faults;
};

// n_steps synchronous steps; faults are keyed by absolute time so that
// run_sync(s, a + b) equals run_sync(run_sync(s, a), b).
SyncTrajectory run_sync(const LatticeState& initial, std::int64_t n_steps,
                        const NoiseParams& noise, const SyncOptions& options = {});

enum class EventKind : std::uint8_t { CorrectionAttempt, NoiseJump };

struct AsyncEvent {
  double time = 0.0;  // sequence index in discrete asynchronous mode
  Site site;
  EventKind kind = EventKind::CorrectionAttempt;
  bool accepted = false;
};

// Registers of one site at one counter value.
struct SliceEntry {
  StructureState structure;
  std::uint32_t dx = 0;
  std::uint32_t dz = 0;
  friend bool operator==(const SliceEntry&, const SliceEntry&) = default;
};

struct AsyncOptions {
  CycleConfig cycle = [] {
    CycleConfig c;
    c.rule = StepRule::Structure;
    return c;
  }();
  std::uint64_t seed = 1;
  bool record_history = false;
  bool log_events = false;
  // Explicit site sequence (row-major indices); replaces the hashed choice.
  std::optional<std::vector<std::uint32_t>> order;
};

struct AsyncTrajectory {
  LatticeState state;  // newest registers of every site; counters in the counter plane
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t max_gap = 0;
  FaultPath faults;
  std::vector<AsyncEvent> events;
  // history[k][c] = registers of site k at counter c (record_history only).
  std::vector<std::vector<SliceEntry>> history;

  std::uint64_t min_counter() const;
  // State of every site at counter c; requires c <= min_counter() and history.
  LatticeState slice(std::uint64_t c) const;
};

// Sequential marching-soldier updates. An attempt at s is accepted iff
// counter(s) <= counter of all four neighbours; an accepted update reads N
// and E at the slice counter(s) from a two-deep history. Throws
// InvariantViolation if a neighbour gap ever exceeds 1, and ConfigError for
// two-site data gates.
AsyncTrajectory run_async(const LatticeState& initial, std::uint64_t n_events,
                          const NoiseParams& noise, const AsyncOptions& options = {});

struct CTParams {
  double p = 0.0;          // total noise rate per site
  double duration = 0.0;
  std::uint64_t seed = 1;
  CycleConfig cycle = [] {
    CycleConfig c;
    c.rule = StepRule::Structure;
    return c;
  }();
  bool structure_noise = true;
  bool data_noise = false;
  double sample_rate = 1.0;  // Poisson rate of local-minimum density samples
  bool log_events = false;
  bool record_history = false;
  std::size_t max_interval_samples = 0;  // per-site inter-attempt intervals to keep
};

struct DensitySample {
  double time = 0.0;
  double fraction = 0.0;
};

struct CTTrajectory {
  AsyncTrajectory async;
  double end_time = 0.0;
  std::uint64_t attempts = 0;
  std::uint64_t noise_events = 0;
  std::uint64_t accepted_after_noise = 0;
  std::vector<DensitySample> density;
  std::vector<double> attempt_intervals;
};

// Next-event simulation: every site attempts corrections at rate 1 and
// suffers noise jumps at rate p; attempts follow run_async semantics.
CTTrajectory run_ct(const LatticeState& initial, const CTParams& params);

// Fraction of sites whose counter is <= all four neighbours.
double local_min_fraction(const LatticeState& lattice);

// Mean of the density samples in [t_from, t_to] with a batched-means CI.
Estimate local_min_density(const CTTrajectory& traj, double t_from, double t_to,
                           int batches = 10);

// Accepted corrections preceded (since the site's last accepted update) by
// at least one noise event, over all accepted corrections.
double effective_fault_rate(const CTTrajectory& traj);

// Append-only text log: `t site kind accepted`.
void write_event_log(std::ostream& out, const std::vector<AsyncEvent>& events, int n);

}  // namespace toomqca
