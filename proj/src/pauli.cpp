#include "toomqca/pauli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "toomqca/errors.hpp"

namespace toomqca {

std::string to_string(GateOp op) {
  switch (op) {
    case GateOp::Idle: return "idle";
    case GateOp::X: return "x";
    case GateOp::Y: return "y";
    case GateOp::Z: return "z";
    case GateOp::H: return "h";
    case GateOp::S: return "s";
    case GateOp::CX: return "cx";
    case GateOp::CZ: return "cz";
    case GateOp::Swap: return "swap";
    case GateOp::Reset: return "reset";
    case GateOp::Mcx: return "mcx";
    case GateOp::T: return "t";
    case GateOp::CCX: return "ccx";
  }
  return "idle";
}

GateOp gate_op_from_string(const std::string& name) {
  static const std::pair<const char*, GateOp> table[] = {
      {"idle", GateOp::Idle}, {"x", GateOp::X},       {"y", GateOp::Y},
      {"z", GateOp::Z},       {"h", GateOp::H},       {"s", GateOp::S},
      {"cx", GateOp::CX},     {"cnot", GateOp::CX},   {"cz", GateOp::CZ},
      {"swap", GateOp::Swap}, {"reset", GateOp::Reset}, {"prep", GateOp::Reset},
      {"mcx", GateOp::Mcx},   {"t", GateOp::T},       {"ccx", GateOp::CCX},
      {"toffoli", GateOp::CCX}};
  for (const auto& [key, op] : table) {
    if (name == key) return op;
  }
  throw ConfigError("unknown gate '" + name + "'");
}

std::uint64_t support_mask(const GadgetOp& op) {
  std::uint64_t m = 0;
  for (int q : op.qubits) m |= 1ULL << q;
  return m;
}

namespace {

inline std::uint64_t bit(std::uint64_t m, int q) { return (m >> q) & 1ULL; }

inline void set_bit(std::uint64_t& m, int q, std::uint64_t v) {
  m = (m & ~(1ULL << q)) | (v << q);
}

void apply_op(const GadgetOp& g, Frame& f) {
  const auto& q = g.qubits;
  switch (g.op) {
    case GateOp::Idle:
    case GateOp::X:
    case GateOp::Y:
    case GateOp::Z:
      break;
    case GateOp::H:
      for (int a : q) {
        const auto xa = bit(f.x, a);
        set_bit(f.x, a, bit(f.z, a));
        set_bit(f.z, a, xa);
      }
      break;
    case GateOp::S:
      for (int a : q) f.z ^= bit(f.x, a) << a;
      break;
    case GateOp::CX:
      f.x ^= bit(f.x, q[0]) << q[1];
      f.z ^= bit(f.z, q[1]) << q[0];
      break;
    case GateOp::CZ:
      f.z ^= bit(f.x, q[1]) << q[0];
      f.z ^= bit(f.x, q[0]) << q[1];
      break;
    case GateOp::Swap: {
      const auto x0 = bit(f.x, q[0]), z0 = bit(f.z, q[0]);
      set_bit(f.x, q[0], bit(f.x, q[1]));
      set_bit(f.z, q[0], bit(f.z, q[1]));
      set_bit(f.x, q[1], x0);
      set_bit(f.z, q[1], z0);
      break;
    }
    case GateOp::Reset:
      for (int a : q) {
        set_bit(f.x, a, 0);
        set_bit(f.z, a, 0);
      }
      break;
    case GateOp::Mcx: {
      const std::size_t nc = q.size() - 1;
      bool fire = true;
      for (std::size_t k = 0; k < nc; ++k) {
        if (bit(f.x, q[k]) != ((g.pattern >> k) & 1u)) fire = false;
      }
      if (fire) f.x ^= 1ULL << q.back();
      break;
    }
    case GateOp::T:
    case GateOp::CCX:
      throw UnsupportedGate("gate '" + to_string(g.op) + "' is not Clifford");
  }
}

void check_arity(const GadgetOp& g, int width) {
  const std::size_t k = g.qubits.size();
  bool ok = k >= 1;
  switch (g.op) {
    case GateOp::CX:
    case GateOp::CZ:
    case GateOp::Swap: ok = k == 2; break;
    case GateOp::Mcx: ok = k >= 2; break;
    case GateOp::CCX: ok = k == 3; break;
    default: break;
  }
  for (int q : g.qubits) ok = ok && q >= 0 && q < width;
  if (!ok) throw ConfigError("gadget location '" + to_string(g.op) + "' has a bad qubit list");
}

}  // namespace

Frame run_gadget(const GadgetCircuit& gadget, const Frame& input,
                 const std::vector<GadgetFault>& faults) {
  Frame f = input;
  std::size_t next = 0;
  for (std::size_t loc = 0; loc < gadget.ops.size(); ++loc) {
    apply_op(gadget.ops[loc], f);
    while (next < faults.size() && faults[next].location == static_cast<int>(loc)) {
      f ^= faults[next].pauli;
      ++next;
    }
  }
  if (next != faults.size()) {
    // Faults were not sorted by location; apply the slow path.
    f = input;
    for (std::size_t loc = 0; loc < gadget.ops.size(); ++loc) {
      apply_op(gadget.ops[loc], f);
      for (const auto& flt : faults) {
        if (flt.location == static_cast<int>(loc)) f ^= flt.pauli;
      }
    }
  }
  return f;
}

GadgetCircuit parse_gadget(std::istream& in) {
  GadgetCircuit g;
  g.ops.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "name") {
      ls >> g.name;
    } else if (head == "role") {
      std::string r;
      ls >> r;
      if (r == "ec") g.role = GadgetRole::EC;
      else if (r == "gate1") g.role = GadgetRole::Gate1;
      else if (r == "gate2") g.role = GadgetRole::Gate2;
      else if (r == "prep") g.role = GadgetRole::Prep;
      else if (r == "measure") g.role = GadgetRole::Measure;
      else throw ConfigError("gadget line " + std::to_string(lineno) + ": unknown role");
    } else if (head == "action") {
      std::string a;
      ls >> a;
      if (a == "identity") g.action = LogicalAction::Identity;
      else if (a == "cx") g.action = LogicalAction::CX;
      else throw ConfigError("gadget line " + std::to_string(lineno) + ": unknown action");
    } else if (head == "blocks") {
      ls >> g.blocks;
    } else if (head == "block_size") {
      ls >> g.block_size;
    } else if (head == "width") {
      ls >> g.width;
    } else {
      GadgetOp op;
      op.op = gate_op_from_string(head);
      std::string tok;
      while (ls >> tok) {
        if (tok == "->") continue;
        if (tok == "pattern") {
          std::string bits;
          ls >> bits;
          op.pattern = 0;
          for (std::size_t k = 0; k < bits.size(); ++k) {
            if (bits[k] == '1') op.pattern |= 1u << k;
          }
          continue;
        }
        op.qubits.push_back(std::stoi(tok));
      }
      if (op.op == GateOp::Mcx && line.find("pattern") == std::string::npos) {
        op.pattern = (1u << (op.qubits.size() - 1)) - 1;
      }
      g.ops.push_back(std::move(op));
    }
  }
  if (g.width > 64 || g.width < g.data_qubits()) throw ConfigError("gadget width out of range");
  for (const auto& op : g.ops) check_arity(op, g.width);
  return g;
}

GadgetCircuit load_gadget(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gadget file '" + path + "'");
  return parse_gadget(in);
}

namespace {

GadgetCircuit rep3_ec_impl(bool with_correction) {
  GadgetCircuit g;
  g.name = with_correction ? "rep3_ec" : "rep3_ec_no_correction";
  g.role = GadgetRole::EC;
  g.blocks = 1;
  g.block_size = 3;
  g.width = 6;
  const int a01 = 3, a02 = 4, a12 = 5;
  for (int a : {a01, a02, a12}) g.ops.push_back({GateOp::Reset, {a}, 0});
  g.ops.push_back({GateOp::CX, {0, a01}, 0});
  g.ops.push_back({GateOp::CX, {1, a01}, 0});
  g.ops.push_back({GateOp::CX, {0, a02}, 0});
  g.ops.push_back({GateOp::CX, {2, a02}, 0});
  g.ops.push_back({GateOp::CX, {1, a12}, 0});
  g.ops.push_back({GateOp::CX, {2, a12}, 0});
  if (with_correction) {
    g.ops.push_back({GateOp::Mcx, {a01, a02, 0}, 0b11});
    g.ops.push_back({GateOp::Mcx, {a01, a12, 1}, 0b11});
    g.ops.push_back({GateOp::Mcx, {a02, a12, 2}, 0b11});
  }
  for (int a : {a01, a02, a12}) g.ops.push_back({GateOp::Reset, {a}, 0});
  return g;
}

}  // namespace

GadgetCircuit rep3_ec_gadget() { return rep3_ec_impl(true); }
GadgetCircuit rep3_ec_without_correction() { return rep3_ec_impl(false); }

GadgetCircuit identity_gadget(int block_size) {
  GadgetCircuit g;
  g.name = "identity";
  g.role = GadgetRole::Gate1;
  g.block_size = block_size;
  g.width = block_size;
  for (int q = 0; q < block_size; ++q) g.ops.push_back({GateOp::Idle, {q}, 0});
  return g;
}

GadgetCircuit rep3_idle_gadget() {
  auto g = identity_gadget(3);
  g.name = "rep3_idle";
  return g;
}

GadgetCircuit rep3_cnot_gadget() {
  GadgetCircuit g;
  g.name = "rep3_cnot";
  g.role = GadgetRole::Gate2;
  g.action = LogicalAction::CX;
  g.blocks = 2;
  g.block_size = 3;
  g.width = 6;
  for (int q = 0; q < 3; ++q) g.ops.push_back({GateOp::CX, {q, q + 3}, 0});
  return g;
}

GadgetCircuit embed(const GadgetCircuit& part, const std::vector<int>& qubit_map, int width) {
  GadgetCircuit out = part;
  out.width = width;
  for (auto& op : out.ops) {
    for (int& q : op.qubits) q = qubit_map.at(q);
  }
  return out;
}

GadgetCircuit concat(const std::string& name, const std::vector<GadgetCircuit>& parts) {
  GadgetCircuit out;
  out.name = name;
  out.ops.clear();
  if (parts.empty()) return out;
  out.width = 0;
  out.block_size = parts.front().block_size;
  out.blocks = 0;
  for (const auto& p : parts) {
    out.width = std::max(out.width, p.width);
    out.blocks = std::max(out.blocks, p.blocks);
    if (p.action == LogicalAction::CX) out.action = LogicalAction::CX;
    out.ops.insert(out.ops.end(), p.ops.begin(), p.ops.end());
  }
  out.role = out.blocks > 1 ? GadgetRole::Gate2 : GadgetRole::Gate1;
  return out;
}

}  // namespace toomqca
