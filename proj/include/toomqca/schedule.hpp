#pragma once

// The error-correcting cycle: T_ref refresh steps in which only the
// structure registers evolve, then T_code simulation steps in which each
// site also applies the data gate its Toom-adjusted (tau, x, y) selects.
// Gates that cross a block boundary run only when the coordinates of both
// sites are consistent.

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toomqca/data_layer.hpp"
#include "toomqca/lattice.hpp"
#include "toomqca/noise.hpp"

namespace toomqca {

enum class PhaseKind : std::uint8_t { Refresh, Simulation };

struct CyclePhase {
  PhaseKind kind = PhaseKind::Refresh;
  int step_in_cycle = 0;

  static CyclePhase of(int tau, const ScheduleParams& p) {
    return {tau < p.T_ref ? PhaseKind::Refresh : PhaseKind::Simulation, tau};
  }
  // Offset of the step within its phase.
  int offset(const ScheduleParams& p) const {
    return kind == PhaseKind::Refresh ? step_in_cycle : step_in_cycle - p.T_ref;
  }
};

enum class GateKind : std::uint8_t {
  Idle,
  Flip,
  ToomMaj,
  Ec,
  CnotNorth,
  CnotEast,
  SwapNorth,
  SwapEast,
};

std::string to_string(GateKind g);
GateKind gate_kind_from_string(const std::string& s);

inline bool is_two_site(GateKind g) {
  return g == GateKind::CnotNorth || g == GateKind::CnotEast || g == GateKind::SwapNorth ||
         g == GateKind::SwapEast;
}

inline Direction partner_direction(GateKind g) {
  return (g == GateKind::CnotNorth || g == GateKind::SwapNorth) ? Direction::North
                                                                : Direction::East;
}

struct CoordClass {
  enum class Kind : std::uint8_t { Any, Value, Edge, Even, Odd } kind = Kind::Any;
  int value = 0;

  bool matches(int v, int M) const {
    switch (kind) {
      case Kind::Any: return true;
      case Kind::Value: return v == value;
      case Kind::Edge: return v == M - 1;
      case Kind::Even: return v % 2 == 0;
      case Kind::Odd: return v % 2 == 1;
    }
    return false;
  }
};

struct ScheduleEntry {
  PhaseKind phase = PhaseKind::Simulation;
  std::optional<int> offset;  // step offset within the phase; nullopt = any
  CoordClass x;
  CoordClass y;
  GateKind gate = GateKind::Idle;
};

// Maps (phase, step offset, x, y) to a gate; the first matching entry wins
// and unmatched controls are idle.
//
// Grammar, one entry per line, '#' starts a comment:
//   <phase> <offset> <x-class> <y-class> <gate>
//   phase   := refresh | sim
//   offset  := * | integer step offset within the phase
//   class   := * | integer | edge | even | odd      (edge means M-1)
//   gate    := idle | flip | toom_maj | ec | cnot_n | cnot_e | swap_n | swap_e
// Refresh entries must be idle.
class ScheduleTable {
 public:
  ScheduleTable() = default;
  explicit ScheduleTable(std::string name, std::vector<ScheduleEntry> entries = {})
      : name_(std::move(name)), entries_(std::move(entries)) {}

  const std::string& name() const { return name_; }
  const std::vector<ScheduleEntry>& entries() const { return entries_; }

  GateKind lookup(int tau, int x, int y, const ScheduleParams& p) const {
    const CyclePhase ph = CyclePhase::of(tau, p);
    if (ph.kind == PhaseKind::Refresh) return GateKind::Idle;
    const int off = ph.offset(p);
    for (const auto& e : entries_) {
      if (e.phase != ph.kind) continue;
      if (e.offset && *e.offset != off) continue;
      if (!e.x.matches(x, p.M) || !e.y.matches(y, p.M)) continue;
      return e.gate;
    }
    return GateKind::Idle;
  }

  bool has_two_site_gates() const;

  static ScheduleTable parse(std::istream& in, const std::string& name = "custom");
  static ScheduleTable load(const std::string& path);
  static ScheduleTable builtin(const std::string& name);  // identity | repetition | stabilizer

 private:
  std::string name_;
  std::vector<ScheduleEntry> entries_;
};

// (x, y) of b differ from a by the unit offset of `dir` modulo M and the
// time stamps agree.
bool coord_consistent(const StructureState& a, const StructureState& b, Direction dir,
                      const ScheduleParams& p);

struct GateCall {
  std::int64_t time = 0;
  std::uint64_t op_id = 0;
  GateKind gate = GateKind::Idle;
  std::vector<Site> support;
  bool crosses_block_boundary = false;
  bool gated = false;
  friend bool operator==(const GateCall&, const GateCall&) = default;
};

struct CycleInstrumentation {
  std::uint64_t data_locations = 0;
  std::uint64_t cross_block_calls = 0;
  std::uint64_t gated_calls = 0;
  // Executed cross-block gates whose two sites did not hold neighbouring
  // coordinates; should stay zero with gating on.
  std::uint64_t inconsistent_cross_block_executions = 0;
  // Per block: simulation-phase data locations run with singular controls
  // whose action differed from the nominal schedule.
  std::vector<std::uint64_t> incorrectly_controlled;
  // Refresh-phase sites whose singular controls selected a non-idle gate.
  std::uint64_t refresh_rogue_gates = 0;
  bool record_calls = false;
  std::vector<GateCall> calls;

  void reset_blocks() { std::fill(incorrectly_controlled.begin(), incorrectly_controlled.end(), 0); }
};

enum class StepRule : std::uint8_t { Structure, Cycle };

struct CycleConfig {
  ScheduleTable table = ScheduleTable::builtin("identity");
  bool gating = true;
  std::optional<CodeSpec> code;  // used by ec on Pauli-frame data
  StepRule rule = StepRule::Cycle;
};

// Inputs of one site update: the slice values of s, N(s), E(s).
struct SiteView {
  StructureState s, north, east;
  std::uint32_t dx_s = 0, dz_s = 0;
  std::uint32_t dx_n = 0, dz_n = 0;
  std::uint32_t dx_e = 0, dz_e = 0;
};

struct SiteResult {
  StructureState structure;
  StructureState control;
  std::uint32_t dx = 0, dz = 0;
  GateKind gate = GateKind::Idle;
};

// Site-local part of a step: structure update and single-site data gates.
// Two-site gates are only reported in `gate`; the caller applies them.
SiteResult site_rule(const SiteView& v, const CycleConfig& cfg, const ScheduleParams& p,
                     DataKind kind, const IdealDecoder* decoder);

// Holds a decoder built from the config's code so that callers do not
// rebuild it every step.
class CycleRunner {
 public:
  CycleRunner(CycleConfig cfg, const LatticeState& lattice);

  const CycleConfig& config() const { return cfg_; }

  // One synchronous step at time lattice.global_time(): update, then faults.
  FaultPath step(LatticeState& lattice, const NoiseParams& noise,
                 CycleInstrumentation* inst = nullptr);

  FaultPath run_cycle(LatticeState& lattice, const NoiseParams& noise,
                      CycleInstrumentation* inst = nullptr);
  FaultPath run_macro_step(LatticeState& lattice, const NoiseParams& noise,
                           CycleInstrumentation* inst = nullptr);

 private:
  CycleConfig cfg_;
  std::optional<IdealDecoder> decoder_;
  std::vector<std::int32_t> tau_, x_, y_;
  std::vector<std::uint32_t> dx_, dz_;
  std::vector<std::int32_t> ctrl_tau_, ctrl_x_, ctrl_y_;
  std::vector<GateKind> gates_;
};

FaultPath run_cycle(LatticeState& lattice, const CycleConfig& cfg, const NoiseParams& noise,
                    CycleInstrumentation* inst = nullptr);
FaultPath run_macro_step(LatticeState& lattice, const CycleConfig& cfg, const NoiseParams& noise,
                         CycleInstrumentation* inst = nullptr);

// Gate calls the schedule prescribes for one cycle on the ideal trajectory
// starting at `start_time`, in the order the simulator emits them.
std::vector<GateCall> nominal_calls(const LatticeState& lattice, const ScheduleTable& table,
                                    std::int64_t start_time);

// Largest per-block count of incorrectly controlled data locations.
std::uint64_t count_C_bound(const CycleInstrumentation& inst);

// Applies every adversarial event scheduled at `time`, otherwise samples
// i.i.d. faults for the given locations. Used by the schedulers.
std::vector<FaultEvent> faults_for_step(const NoiseParams& noise, std::int64_t time,
                                        std::span<const Location> locations,
                                        const EffectContext& ctx);

}  // namespace toomqca
