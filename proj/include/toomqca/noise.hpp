#pragma once

// Stochastic and adversarial fault injection. A location is one local
// operation at a fixed step; its fault decision is a pure function of
// (seed, time, op_id).

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "toomqca/lattice.hpp"

namespace toomqca {

enum class LocationKind : std::uint8_t { Structure = 0, Data = 1 };

struct Location {
  std::int64_t time = 0;
  std::uint64_t op_id = 0;
  LocationKind kind = LocationKind::Structure;
  std::vector<Site> support;
};

// op_id = kind * n^2 + i * n + j, with (i, j) the site that owns the operation.
inline std::uint64_t location_op_id(LocationKind kind, Site s, int n) {
  const auto nn = static_cast<std::uint64_t>(n);
  return static_cast<std::uint64_t>(kind) * nn * nn + static_cast<std::uint64_t>(s.i) * nn +
         static_cast<std::uint64_t>(s.j);
}

inline Site location_owner(std::uint64_t op_id, int n) {
  const auto nn = static_cast<std::uint64_t>(n);
  const auto r = op_id % (nn * nn);
  return {static_cast<int>(r / nn), static_cast<int>(r % nn)};
}

enum class EffectTag : std::uint8_t { StructureScramble, DataBitFlip, DataPauli, Custom };

std::string to_string(EffectTag tag);

// Per-support-site payload. StructureScramble uses `structure`, DataBitFlip
// uses `x` as a flip bit, DataPauli uses (x, z) masks over the block and
// Custom uses `x` as an xor applied to an opaque symbol.
struct SitePayload {
  StructureState structure;
  std::uint32_t x = 0;
  std::uint32_t z = 0;
  friend bool operator==(const SitePayload&, const SitePayload&) = default;
};

struct FaultEvent {
  Location location;
  EffectTag effect = EffectTag::StructureScramble;
  std::vector<SitePayload> payload;
};

struct FaultPath {
  std::vector<FaultEvent> events;
  std::uint64_t seed = 0;
  double p = 0.0;

  void append(const FaultPath& other) {
    events.insert(events.end(), other.events.begin(), other.events.end());
  }
};

enum class NoiseMode : std::uint8_t { IID, Adversarial };

struct NoiseParams {
  double p = 0.0;
  NoiseMode mode = NoiseMode::IID;
  std::vector<FaultEvent> events;  // adversarial mode: applied when their time comes up
  bool structure = true;
  bool data = true;
  std::uint64_t seed = 0;

  double eta() const { return std::sqrt(p); }
  bool silent() const { return mode == NoiseMode::IID ? p <= 0.0 : events.empty(); }
};

inline double eta_from_p(double p) { return std::sqrt(p); }

// Alphabet sizes needed to draw effects.
struct EffectContext {
  int T0 = 24;
  int M = 24;
  DataKind data_kind = DataKind::ClassicalBit;
  int block_size = 3;

  static EffectContext of(const LatticeState& lattice) {
    return {lattice.params().T0(), lattice.params().M, lattice.data_kind(),
            lattice.block_size()};
  }
};

// Draw the effect of a location known to be faulted. Structure locations
// scramble every support site uniformly over (tau, x, y); data locations
// draw uniformly among the non-identity effects on the support.
FaultEvent draw_effect(const Location& location, const EffectContext& ctx, std::uint64_t seed);

bool location_faulted(const Location& location, double p, std::uint64_t seed);

std::vector<FaultEvent> sample_faults(std::span<const Location> locations, double p,
                                      std::uint64_t seed, const EffectContext& ctx);

// Structure locations of one synchronous step: the Toom update owned by
// each site, with support {s, N(s), E(s)}. With single_site the support is
// {s} (asynchronous updates).
std::vector<Location> structure_locations(int n, std::int64_t time, bool single_site = false);

// Throws ConfigError when a support site is outside the lattice.
void apply_fault(LatticeState& lattice, const FaultEvent& event);

// True when the two lattices differ only on the event's support.
bool change_confined(const LatticeState& before, const LatticeState& after,
                     const FaultEvent& event);

// Line format: `time op_id site_list effect_tag payload`, with
// site_list = i,j;i,j;...  and payload entries separated by ';'.
void write_fault_path(std::ostream& out, const FaultPath& path);
FaultPath read_fault_path(std::istream& in);

}  // namespace toomqca
