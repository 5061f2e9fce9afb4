#include "toomqca/schedule.hpp"

#include <fstream>
#include <sstream>

#include "toomqca/errors.hpp"
#include "toomqca/rng.hpp"
#include "toomqca/structure.hpp"

namespace toomqca {

std::string to_string(GateKind g) {
  switch (g) {
    case GateKind::Idle: return "idle";
    case GateKind::Flip: return "flip";
    case GateKind::ToomMaj: return "toom_maj";
    case GateKind::Ec: return "ec";
    case GateKind::CnotNorth: return "cnot_n";
    case GateKind::CnotEast: return "cnot_e";
    case GateKind::SwapNorth: return "swap_n";
    case GateKind::SwapEast: return "swap_e";
  }
  return "idle";
}

GateKind gate_kind_from_string(const std::string& s) {
  for (auto g : {GateKind::Idle, GateKind::Flip, GateKind::ToomMaj, GateKind::Ec,
                 GateKind::CnotNorth, GateKind::CnotEast, GateKind::SwapNorth,
                 GateKind::SwapEast}) {
    if (to_string(g) == s) return g;
  }
  throw ConfigError("unknown schedule gate '" + s + "'");
}

bool ScheduleTable::has_two_site_gates() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const ScheduleEntry& e) { return is_two_site(e.gate); });
}

namespace {

CoordClass parse_class(const std::string& tok, int lineno) {
  CoordClass c;
  if (tok == "*") return c;
  if (tok == "edge") c.kind = CoordClass::Kind::Edge;
  else if (tok == "even") c.kind = CoordClass::Kind::Even;
  else if (tok == "odd") c.kind = CoordClass::Kind::Odd;
  else {
    try {
      c.kind = CoordClass::Kind::Value;
      c.value = std::stoi(tok);
    } catch (const std::exception&) {
      throw ConfigError("schedule line " + std::to_string(lineno) + ": bad class '" + tok + "'");
    }
  }
  return c;
}

}  // namespace

ScheduleTable ScheduleTable::parse(std::istream& in, const std::string& name) {
  std::vector<ScheduleEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string phase, off, xc, yc, gate;
    if (!(ls >> phase)) continue;
    if (!(ls >> off >> xc >> yc >> gate)) {
      throw ConfigError("schedule line " + std::to_string(lineno) + ": expected 5 fields");
    }
    ScheduleEntry e;
    if (phase == "refresh") e.phase = PhaseKind::Refresh;
    else if (phase == "sim") e.phase = PhaseKind::Simulation;
    else throw ConfigError("schedule line " + std::to_string(lineno) + ": unknown phase");
    if (off != "*") {
      try {
        e.offset = std::stoi(off);
      } catch (const std::exception&) {
        throw ConfigError("schedule line " + std::to_string(lineno) + ": bad offset");
      }
    }
    e.x = parse_class(xc, lineno);
    e.y = parse_class(yc, lineno);
    e.gate = gate_kind_from_string(gate);
    if (e.phase == PhaseKind::Refresh && e.gate != GateKind::Idle) {
      throw ConfigError("schedule line " + std::to_string(lineno) +
                        ": data gates are not allowed in the refresh phase");
    }
    entries.push_back(e);
  }
  return ScheduleTable(name, std::move(entries));
}

ScheduleTable ScheduleTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule table '" + path + "'");
  auto slash = path.find_last_of('/');
  return parse(in, slash == std::string::npos ? path : path.substr(slash + 1));
}

ScheduleTable ScheduleTable::builtin(const std::string& name) {
  std::istringstream in;
  if (name == "identity") {
    in.str("sim * * * idle\n");
  } else if (name == "repetition") {
    in.str("sim * * * toom_maj\n");
  } else if (name == "stabilizer") {
    in.str(
        "sim 0 * * ec\n"
        "sim 1 * odd cnot_e\n"
        "sim 2 * * ec\n"
        "sim 3 odd * cnot_n\n"
        "sim 4 * * ec\n");
  } else {
    throw ConfigError("unknown built-in schedule '" + name + "'");
  }
  return parse(in, name);
}

bool coord_consistent(const StructureState& a, const StructureState& b, Direction dir,
                      const ScheduleParams& p) {
  if (a.tau != b.tau) return false;
  const int M = p.M;
  switch (dir) {
    case Direction::North: return b.x == wrap(a.x + 1, M) && b.y == a.y;
    case Direction::South: return b.x == wrap(a.x - 1, M) && b.y == a.y;
    case Direction::East: return b.y == wrap(a.y + 1, M) && b.x == a.x;
    case Direction::West: return b.y == wrap(a.y - 1, M) && b.x == a.x;
  }
  return false;
}

namespace {

// Written independently of coord_consistent: the offset of b relative to a
// must be exactly (1, 0) going north or (0, 1) going east, on the same step.
bool neighbours_agree(const StructureState& a, const StructureState& b, Direction dir, int M) {
  const int dx = ((b.x - a.x) % M + M) % M;
  const int dy = ((b.y - a.y) % M + M) % M;
  const int want_dx = dir == Direction::North ? 1 : 0;
  const int want_dy = dir == Direction::East ? 1 : 0;
  return dx == want_dx && dy == want_dy && a.tau == b.tau;
}

std::vector<Site> gate_support(GateKind g, Site s, int n) {
  switch (g) {
    case GateKind::ToomMaj:
      return {s, neighbor(s, Direction::North, n), neighbor(s, Direction::East, n)};
    case GateKind::CnotNorth:
    case GateKind::SwapNorth: return {s, neighbor(s, Direction::North, n)};
    case GateKind::CnotEast:
    case GateKind::SwapEast: return {s, neighbor(s, Direction::East, n)};
    default: return {s};
  }
}

}  // namespace

SiteResult site_rule(const SiteView& v, const CycleConfig& cfg, const ScheduleParams& p,
                     DataKind kind, const IdealDecoder* decoder) {
  SiteResult r;
  r.control = toom_adjusted(v.s, v.north, v.east, p);
  r.structure = {wrap(r.control.tau + 1, p.T0()), r.control.x, r.control.y};
  r.dx = v.dx_s;
  r.dz = v.dz_s;
  if (cfg.rule == StepRule::Structure) return r;
  r.gate = cfg.table.lookup(r.control.tau, r.control.x, r.control.y, p);
  switch (r.gate) {
    case GateKind::Flip:
      if (kind != DataKind::PauliFrame) r.dx ^= 1u;
      break;
    case GateKind::ToomMaj:
      if (kind == DataKind::PauliFrame) {
        if (v.dx_n == v.dx_e && v.dz_n == v.dz_e) {
          r.dx = v.dx_n;
          r.dz = v.dz_n;
        }
      } else {
        r.dx = maj(v.dx_s, v.dx_n, v.dx_e);
      }
      break;
    case GateKind::Ec:
      if (kind == DataKind::PauliFrame && decoder) {
        const auto d = decoder->decode(Frame{v.dx_s, v.dz_s});
        r.dx ^= static_cast<std::uint32_t>(d.correction.x);
        r.dz ^= static_cast<std::uint32_t>(d.correction.z);
      }
      break;
    default: break;
  }
  return r;
}

CycleRunner::CycleRunner(CycleConfig cfg, const LatticeState& lattice) : cfg_(std::move(cfg)) {
  if (lattice.data_kind() == DataKind::PauliFrame) {
    if (cfg_.code) {
      if (cfg_.code->block_size != lattice.block_size()) {
        throw ConfigError("code block size does not match the lattice data blocks");
      }
      decoder_.emplace(*cfg_.code);
    } else if (lattice.block_size() == 3) {
      decoder_.emplace(rep3_code());
    }
  }
}

std::vector<FaultEvent> faults_for_step(const NoiseParams& noise, std::int64_t time,
                                        std::span<const Location> locations,
                                        const EffectContext& ctx) {
  std::vector<FaultEvent> out;
  if (noise.mode == NoiseMode::Adversarial) {
    for (const auto& ev : noise.events) {
      if (ev.location.time == time) out.push_back(ev);
    }
    return out;
  }
  return sample_faults(locations, noise.p, noise.seed, ctx);
}

FaultPath CycleRunner::step(LatticeState& lat, const NoiseParams& noise,
                            CycleInstrumentation* inst) {
  const int n = lat.n();
  const auto& p = lat.params();
  const int M = p.M;
  const std::int64_t t = lat.global_time();
  const std::size_t N = lat.size();
  const DataKind kind = lat.data_kind();
  const IdealDecoder* dec = decoder_ ? &*decoder_ : nullptr;

  tau_.assign(lat.tau_plane().begin(), lat.tau_plane().end());
  x_.assign(lat.x_plane().begin(), lat.x_plane().end());
  y_.assign(lat.y_plane().begin(), lat.y_plane().end());
  dx_.assign(lat.data_plane().begin(), lat.data_plane().end());
  dz_.assign(lat.data_z_plane().begin(), lat.data_z_plane().end());
  ctrl_tau_.resize(N);
  ctrl_x_.resize(N);
  ctrl_y_.resize(N);
  gates_.assign(N, GateKind::Idle);

  const bool cycle = cfg_.rule == StepRule::Cycle;
  const int blocks_per_side = n / M;
  if (inst && inst->incorrectly_controlled.size() !=
                  static_cast<std::size_t>(blocks_per_side) * blocks_per_side) {
    inst->incorrectly_controlled.assign(static_cast<std::size_t>(blocks_per_side) * blocks_per_side,
                                        0);
  }
  const int tau_ideal = wrap(t, p.T0());

  auto slice = [&](std::size_t k) { return StructureState{tau_[k], x_[k], y_[k]}; };

  auto tau_out = lat.tau_plane();
  auto x_out = lat.x_plane();
  auto y_out = lat.y_plane();
  auto dx_out = lat.data_plane();
  auto dz_out = lat.data_z_plane();

  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * n;
    const std::size_t nrow = static_cast<std::size_t>(i + 1 == n ? 0 : i + 1) * n;
    for (int j = 0; j < n; ++j) {
      const std::size_t k = row + j;
      const std::size_t kn = nrow + j;
      const std::size_t ke = row + (j + 1 == n ? 0 : j + 1);
      const SiteView v{slice(k), slice(kn), slice(ke), dx_[k], dz_[k],
                       dx_[kn],  dz_[kn],   dx_[ke],  dz_[ke]};
      const SiteResult r = site_rule(v, cfg_, p, kind, dec);
      tau_out[k] = r.structure.tau;
      x_out[k] = r.structure.x;
      y_out[k] = r.structure.y;
      ctrl_tau_[k] = r.control.tau;
      ctrl_x_[k] = r.control.x;
      ctrl_y_[k] = r.control.y;
      if (!cycle) continue;
      dx_out[k] = r.dx;
      dz_out[k] = r.dz;
      gates_[k] = r.gate;
      if (inst) {
        ++inst->data_locations;
        if (inst->record_calls && r.gate != GateKind::Idle && !is_two_site(r.gate)) {
          const Site s{i, j};
          inst->calls.push_back({t, location_op_id(LocationKind::Data, s, n), r.gate,
                                 gate_support(r.gate, s, n), false, false});
        }
      }
    }
  }

  if (cycle) {
    for (std::size_t k = 0; k < N; ++k) {
      GateKind g = gates_[k];
      if (!is_two_site(g)) continue;
      const Site s = lat.site(k);
      const Direction dir = partner_direction(g);
      const Site q = neighbor(s, dir, n);
      const std::size_t kq = lat.index(q);
      const bool crosses = dir == Direction::North ? ctrl_x_[k] == M - 1 : ctrl_y_[k] == M - 1;
      bool gated = false;
      if (crosses && cfg_.gating && !coord_consistent(slice(k), slice(kq), dir, p)) gated = true;
      if (!gated) {
        if (g == GateKind::CnotNorth || g == GateKind::CnotEast) {
          if (kind == DataKind::PauliFrame) {
            dx_out[kq] ^= dx_out[k];
            dz_out[k] ^= dz_out[kq];
          } else {
            dx_out[kq] ^= (dx_out[k] & 1u);
          }
        } else {
          std::swap(dx_out[k], dx_out[kq]);
          std::swap(dz_out[k], dz_out[kq]);
        }
      } else {
        gates_[k] = GateKind::Idle;
      }
      if (inst) {
        if (crosses) {
          ++inst->cross_block_calls;
          if (gated) ++inst->gated_calls;
          if (!gated && !neighbours_agree(slice(k), slice(kq), dir, M)) {
            ++inst->inconsistent_cross_block_executions;
          }
        }
        if (inst->record_calls) {
          inst->calls.push_back({t, location_op_id(LocationKind::Data, s, n), g, {s, q}, crosses,
                                 gated});
        }
      }
    }

    if (inst) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const std::size_t k = static_cast<std::size_t>(i) * n + j;
          const StructureState control{ctrl_tau_[k], ctrl_x_[k], ctrl_y_[k]};
          const StructureState ideal{tau_ideal, wrap(i, M), wrap(j, M)};
          if (control == ideal) continue;
          const GateKind nominal = cfg_.table.lookup(ideal.tau, ideal.x, ideal.y, p);
          if (gates_[k] == nominal) continue;
          if (tau_ideal < p.T_ref) {
            ++inst->refresh_rogue_gates;
          } else {
            ++inst->incorrectly_controlled[static_cast<std::size_t>(i / M) * blocks_per_side +
                                           j / M];
          }
        }
      }
    }
  }

  FaultPath path;
  path.seed = noise.seed;
  path.p = noise.p;
  const EffectContext ctx = EffectContext::of(lat);
  if (noise.mode == NoiseMode::Adversarial) {
    for (const auto& ev : noise.events) {
      if (ev.location.time == t) path.events.push_back(ev);
    }
  } else if (noise.p > 0.0) {
    const std::uint64_t threshold = probability_threshold(noise.p);
    const bool always = noise.p >= 1.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Site s{i, j};
        if (noise.structure) {
          const auto op = location_op_id(LocationKind::Structure, s, n);
          if (always || hash_key(noise.seed, static_cast<std::uint64_t>(t), op) < threshold) {
            Location loc{t, op, LocationKind::Structure,
                         {s, neighbor(s, Direction::North, n), neighbor(s, Direction::East, n)}};
            path.events.push_back(draw_effect(loc, ctx, noise.seed));
          }
        }
        if (noise.data && cycle) {
          const auto op = location_op_id(LocationKind::Data, s, n);
          if (always || hash_key(noise.seed, static_cast<std::uint64_t>(t), op) < threshold) {
            const std::size_t k = lat.index(s);
            Location loc{t, op, LocationKind::Data, gate_support(gates_[k], s, n)};
            path.events.push_back(draw_effect(loc, ctx, noise.seed));
          }
        }
      }
    }
  }
  for (const auto& ev : path.events) apply_fault(lat, ev);
  lat.set_global_time(t + 1);
  return path;
}

FaultPath CycleRunner::run_cycle(LatticeState& lat, const NoiseParams& noise,
                                 CycleInstrumentation* inst) {
  FaultPath path;
  path.seed = noise.seed;
  path.p = noise.p;
  for (int s = 0; s < lat.params().T0(); ++s) path.append(step(lat, noise, inst));
  return path;
}

FaultPath CycleRunner::run_macro_step(LatticeState& lat, const NoiseParams& noise,
                                      CycleInstrumentation* inst) {
  FaultPath path;
  path.seed = noise.seed;
  path.p = noise.p;
  for (int c = 0; c < lat.params().T_sim; ++c) path.append(run_cycle(lat, noise, inst));
  return path;
}

FaultPath run_cycle(LatticeState& lattice, const CycleConfig& cfg, const NoiseParams& noise,
                    CycleInstrumentation* inst) {
  CycleRunner runner(cfg, lattice);
  return runner.run_cycle(lattice, noise, inst);
}

FaultPath run_macro_step(LatticeState& lattice, const CycleConfig& cfg, const NoiseParams& noise,
                         CycleInstrumentation* inst) {
  CycleRunner runner(cfg, lattice);
  return runner.run_macro_step(lattice, noise, inst);
}

std::vector<GateCall> nominal_calls(const LatticeState& lattice, const ScheduleTable& table,
                                    std::int64_t start_time) {
  const int n = lattice.n();
  const auto& p = lattice.params();
  std::vector<GateCall> out;
  for (std::int64_t t = start_time; t < start_time + p.T0(); ++t) {
    const int tau = wrap(t, p.T0());
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const Site s{i, j};
          const GateKind g = table.lookup(tau, wrap(i, p.M), wrap(j, p.M), p);
          if (g == GateKind::Idle || is_two_site(g) != (pass == 1)) continue;
          GateCall call{t, location_op_id(LocationKind::Data, s, n), g, gate_support(g, s, n),
                        false, false};
          if (is_two_site(g)) {
            call.crosses_block_boundary = partner_direction(g) == Direction::North
                                              ? wrap(i, p.M) == p.M - 1
                                              : wrap(j, p.M) == p.M - 1;
          }
          out.push_back(std::move(call));
        }
      }
    }
  }
  return out;
}

std::uint64_t count_C_bound(const CycleInstrumentation& inst) {
  std::uint64_t best = 0;
  for (auto c : inst.incorrectly_controlled) best = std::max(best, c);
  return best;
}

}  // namespace toomqca
