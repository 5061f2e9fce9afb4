#include "toomqca/noise.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "toomqca/errors.hpp"
#include "toomqca/rng.hpp"

namespace toomqca {

std::string to_string(EffectTag tag) {
  switch (tag) {
    case EffectTag::StructureScramble: return "scramble";
    case EffectTag::DataBitFlip: return "bitflip";
    case EffectTag::DataPauli: return "pauli";
    case EffectTag::Custom: return "custom";
  }
  return "custom";
}

namespace {

EffectTag effect_from_string(const std::string& s) {
  if (s == "scramble") return EffectTag::StructureScramble;
  if (s == "bitflip") return EffectTag::DataBitFlip;
  if (s == "pauli") return EffectTag::DataPauli;
  if (s == "custom") return EffectTag::Custom;
  throw ConfigError("fault path: unknown effect tag '" + s + "'");
}

std::uint64_t effect_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x6a09e667f3bcc909ULL); }

std::uint64_t low_mask(int bits) {
  return bits >= 64 ? ~0ULL : ((1ULL << bits) - 1);
}

}  // namespace

FaultEvent draw_effect(const Location& location, const EffectContext& ctx, std::uint64_t seed) {
  KeyedStream rng(effect_seed(seed), static_cast<std::uint64_t>(location.time), location.op_id);
  FaultEvent ev{location, EffectTag::StructureScramble, {}};
  const std::size_t k = location.support.size();
  ev.payload.resize(k);
  if (location.kind == LocationKind::Structure) {
    for (auto& pl : ev.payload) {
      pl.structure.tau = static_cast<int>(rng.below(ctx.T0));
      pl.structure.x = static_cast<int>(rng.below(ctx.M));
      pl.structure.y = static_cast<int>(rng.below(ctx.M));
    }
    return ev;
  }
  switch (ctx.data_kind) {
    case DataKind::ClassicalBit: {
      ev.effect = EffectTag::DataBitFlip;
      const std::uint64_t mask = 1 + rng.below((1ULL << k) - 1);
      for (std::size_t q = 0; q < k; ++q) ev.payload[q].x = (mask >> q) & 1u;
      break;
    }
    case DataKind::PauliFrame: {
      ev.effect = EffectTag::DataPauli;
      const int B = ctx.block_size;
      const std::uint64_t m = low_mask(B);
      bool nonzero = false;
      while (!nonzero) {
        for (auto& pl : ev.payload) {
          pl.x = static_cast<std::uint32_t>(rng.next() & m);
          pl.z = static_cast<std::uint32_t>(rng.next() & m);
          nonzero = nonzero || pl.x != 0 || pl.z != 0;
        }
      }
      break;
    }
    case DataKind::Opaque: {
      ev.effect = EffectTag::Custom;
      bool nonzero = false;
      while (!nonzero) {
        for (auto& pl : ev.payload) {
          pl.x = static_cast<std::uint32_t>(rng.next());
          nonzero = nonzero || pl.x != 0;
        }
      }
      break;
    }
  }
  return ev;
}

bool location_faulted(const Location& location, double p, std::uint64_t seed) {
  return keyed_bernoulli(seed, static_cast<std::uint64_t>(location.time), location.op_id, p);
}

std::vector<FaultEvent> sample_faults(std::span<const Location> locations, double p,
                                      std::uint64_t seed, const EffectContext& ctx) {
  std::vector<FaultEvent> out;
  for (const auto& loc : locations) {
    if (location_faulted(loc, p, seed)) out.push_back(draw_effect(loc, ctx, seed));
  }
  return out;
}

std::vector<Location> structure_locations(int n, std::int64_t time, bool single_site) {
  std::vector<Location> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Site s{i, j};
      Location loc{time, location_op_id(LocationKind::Structure, s, n), LocationKind::Structure,
                   {s}};
      if (!single_site) {
        loc.support.push_back(neighbor(s, Direction::North, n));
        loc.support.push_back(neighbor(s, Direction::East, n));
      }
      out.push_back(std::move(loc));
    }
  }
  return out;
}

void apply_fault(LatticeState& lattice, const FaultEvent& event) {
  const int n = lattice.n();
  const auto& sup = event.location.support;
  if (event.payload.size() != sup.size()) {
    throw ConfigError("fault event payload does not match its support");
  }
  for (const Site& s : sup) {
    if (s.i < 0 || s.j < 0 || s.i >= n || s.j >= n) {
      throw ConfigError("fault event support (" + std::to_string(s.i) + "," +
                        std::to_string(s.j) + ") outside the lattice");
    }
  }
  for (std::size_t q = 0; q < sup.size(); ++q) {
    const Site s = sup[q];
    const SitePayload& pl = event.payload[q];
    const std::size_t k = lattice.index(s);
    switch (event.effect) {
      case EffectTag::StructureScramble: lattice.set_structure(s, pl.structure); break;
      case EffectTag::DataBitFlip: lattice.data_plane()[k] ^= (pl.x & 1u); break;
      case EffectTag::DataPauli:
        lattice.data_plane()[k] ^= pl.x;
        lattice.data_z_plane()[k] ^= pl.z;
        break;
      case EffectTag::Custom: lattice.data_plane()[k] ^= pl.x; break;
    }
  }
}

bool change_confined(const LatticeState& before, const LatticeState& after,
                     const FaultEvent& event) {
  if (before.n() != after.n()) return false;
  std::vector<bool> in_support(before.size(), false);
  for (const Site& s : event.location.support) in_support[before.index(s)] = true;
  for (std::size_t k = 0; k < before.size(); ++k) {
    if (in_support[k]) continue;
    if (before.tau_plane()[k] != after.tau_plane()[k] || before.x_plane()[k] != after.x_plane()[k] ||
        before.y_plane()[k] != after.y_plane()[k] || before.data_plane()[k] != after.data_plane()[k] ||
        before.data_z_plane()[k] != after.data_z_plane()[k] ||
        before.counter_plane()[k] != after.counter_plane()[k]) {
      return false;
    }
  }
  return true;
}

void write_fault_path(std::ostream& out, const FaultPath& path) {
  out << "faultpath 1 " << path.seed << ' ';
  {
    std::ostringstream ps;
    ps.precision(17);
    ps << path.p;
    out << ps.str();
  }
  out << ' ' << path.events.size() << '\n';
  for (const auto& ev : path.events) {
    out << ev.location.time << ' ' << ev.location.op_id << ' ';
    for (std::size_t q = 0; q < ev.location.support.size(); ++q) {
      if (q) out << ';';
      out << ev.location.support[q].i << ',' << ev.location.support[q].j;
    }
    out << ' ' << to_string(ev.effect) << ' ';
    for (std::size_t q = 0; q < ev.payload.size(); ++q) {
      if (q) out << ';';
      const auto& pl = ev.payload[q];
      switch (ev.effect) {
        case EffectTag::StructureScramble:
          out << pl.structure.tau << ',' << pl.structure.x << ',' << pl.structure.y;
          break;
        case EffectTag::DataPauli: out << pl.x << ':' << pl.z; break;
        default: out << pl.x; break;
      }
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

}  // namespace

FaultPath read_fault_path(std::istream& in) {
  std::string tag;
  int version = 0;
  std::size_t count = 0;
  FaultPath path;
  in >> tag >> version >> path.seed >> path.p >> count;
  if (!in || tag != "faultpath" || version != 1) throw ConfigError("fault path: bad header");
  for (std::size_t e = 0; e < count; ++e) {
    FaultEvent ev;
    std::string sites, effect, payload;
    if (!(in >> ev.location.time >> ev.location.op_id >> sites >> effect >> payload)) {
      throw ConfigError("fault path: truncated event list");
    }
    ev.effect = effect_from_string(effect);
    ev.location.kind =
        ev.effect == EffectTag::StructureScramble ? LocationKind::Structure : LocationKind::Data;
    for (const auto& s : split(sites, ';')) {
      const auto ij = split(s, ',');
      if (ij.size() != 2) throw ConfigError("fault path: malformed site '" + s + "'");
      ev.location.support.push_back({std::stoi(ij[0]), std::stoi(ij[1])});
    }
    for (const auto& p : split(payload, ';')) {
      SitePayload pl;
      if (ev.effect == EffectTag::StructureScramble) {
        const auto v = split(p, ',');
        if (v.size() != 3) throw ConfigError("fault path: malformed scramble payload");
        pl.structure = {std::stoi(v[0]), std::stoi(v[1]), std::stoi(v[2])};
      } else if (ev.effect == EffectTag::DataPauli) {
        const auto v = split(p, ':');
        if (v.size() != 2) throw ConfigError("fault path: malformed pauli payload");
        pl.x = static_cast<std::uint32_t>(std::stoul(v[0]));
        pl.z = static_cast<std::uint32_t>(std::stoul(v[1]));
      } else {
        pl.x = static_cast<std::uint32_t>(std::stoul(p));
      }
      ev.payload.push_back(pl);
    }
    path.events.push_back(std::move(ev));
  }
  return path;
}

}  // namespace toomqca
