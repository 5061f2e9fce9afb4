#include "toomqca/data_layer.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "toomqca/errors.hpp"
#include "toomqca/structure.hpp"

namespace toomqca {

Frame parse_pauli(const std::string& s) {
  Frame f;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::uint64_t b = 1ULL << k;
    switch (s[k]) {
      case 'I': break;
      case 'X': f.x |= b; break;
      case 'Z': f.z |= b; break;
      case 'Y': f.x |= b; f.z |= b; break;
      default: throw ConfigError(std::string("bad Pauli character '") + s[k] + "'");
    }
  }
  return f;
}

std::string pauli_string(const Frame& f, int width) {
  std::string out(static_cast<std::size_t>(width), 'I');
  for (int k = 0; k < width; ++k) {
    const bool x = (f.x >> k) & 1u, z = (f.z >> k) & 1u;
    out[k] = x && z ? 'Y' : x ? 'X' : z ? 'Z' : 'I';
  }
  return out;
}

CodeSpec parse_code(std::istream& in) {
  CodeSpec code;
  code.block_size = 0;
  std::string line;
  bool have_lx = false, have_lz = false;
  auto note_width = [&](const std::string& p) {
    if (code.block_size == 0) code.block_size = static_cast<int>(p.size());
    if (static_cast<int>(p.size()) != code.block_size) {
      throw ConfigError("code table: operator '" + p + "' has the wrong length");
    }
  };
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    ls >> value;
    if (key == "name") {
      code.name = value;
    } else if (key == "t") {
      code.t = std::stoi(value);
    } else if (key == "error_model") {
      if (value == "bitflip") code.error_model = ErrorModel::BitFlip;
      else if (value == "pauli") code.error_model = ErrorModel::Pauli;
      else throw ConfigError("code table: unknown error model '" + value + "'");
    } else if (key == "stabilizer") {
      note_width(value);
      code.stabilizers.push_back(parse_pauli(value));
    } else if (key == "logical_x") {
      note_width(value);
      code.logical_x = parse_pauli(value);
      have_lx = true;
    } else if (key == "logical_z") {
      note_width(value);
      code.logical_z = parse_pauli(value);
      have_lz = true;
    } else {
      throw ConfigError("code table: unknown key '" + key + "'");
    }
  }
  if (!have_lx || !have_lz || code.stabilizers.empty()) {
    throw ConfigError("code table: missing stabilizers or logical operators");
  }
  if (code.t < 1) throw ConfigError("code table: t must be at least 1");
  for (std::size_t a = 0; a < code.stabilizers.size(); ++a) {
    for (std::size_t b = a + 1; b < code.stabilizers.size(); ++b) {
      if (anticommute(code.stabilizers[a], code.stabilizers[b])) {
        throw ConfigError("code table: stabilizer generators do not commute");
      }
    }
    if (anticommute(code.stabilizers[a], code.logical_x) ||
        anticommute(code.stabilizers[a], code.logical_z)) {
      throw ConfigError("code table: logical operator anticommutes with a stabilizer");
    }
  }
  if (!anticommute(code.logical_x, code.logical_z)) {
    throw ConfigError("code table: logical X and Z must anticommute");
  }
  return code;
}

CodeSpec load_code(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open code table '" + path + "'");
  return parse_code(in);
}

CodeSpec rep3_code() {
  std::istringstream in(
      "name rep3\nt 1\nerror_model bitflip\nstabilizer ZZI\nstabilizer IZZ\n"
      "logical_x XXX\nlogical_z ZII\n");
  return parse_code(in);
}

CodeSpec steane_code() {
  std::istringstream in(
      "name steane\nt 1\nerror_model pauli\n"
      "stabilizer IIIXXXX\nstabilizer IXXIIXX\nstabilizer XIXIXIX\n"
      "stabilizer IIIZZZZ\nstabilizer IZZIIZZ\nstabilizer ZIZIZIZ\n"
      "logical_x XXXXXXX\nlogical_z ZZZZZZZ\n");
  return parse_code(in);
}

IdealDecoder::IdealDecoder(CodeSpec code) : code_(std::move(code)) {
  const int n = code_.block_size;
  const std::size_t m = code_.stabilizers.size();
  if (m > 24) throw ConfigError("code has too many generators for a lookup decoder");
  if (n > 12) throw ConfigError("code block too large for a lookup decoder");
  table_.assign(std::size_t{1} << m, Frame{});
  filled_.assign(table_.size(), false);
  std::vector<int> best(table_.size(), n + 1);
  const std::uint64_t full = (1ULL << n) - 1;
  const std::uint64_t zmax = code_.error_model == ErrorModel::BitFlip ? 0 : full;
  for (std::uint64_t z = 0; z <= zmax; ++z) {
    for (std::uint64_t x = 0; x <= full; ++x) {
      const Frame f{x, z};
      const auto s = syndrome(f);
      const int w = f.weight();
      if (w < best[s]) {
        best[s] = w;
        table_[s] = f;
        filled_[s] = true;
      }
    }
  }
}

std::uint32_t IdealDecoder::syndrome(const Frame& f) const {
  std::uint32_t s = 0;
  for (std::size_t g = 0; g < code_.stabilizers.size(); ++g) {
    if (anticommute(f, code_.stabilizers[g])) s |= 1u << g;
  }
  return s;
}

DecodeResult IdealDecoder::decode(const Frame& block_frame) const {
  Frame f = block_frame;
  if (code_.error_model == ErrorModel::BitFlip) f.z = 0;
  DecodeResult r;
  r.syndrome = syndrome(f);
  if (!filled_[r.syndrome]) throw InvariantViolation("syndrome outside the decoder table");
  r.correction = table_[r.syndrome];
  r.deviation = r.correction.weight();
  const Frame residual = f ^ r.correction;
  r.logical = (anticommute(residual, code_.logical_z) ? 1 : 0) |
              (anticommute(residual, code_.logical_x) ? 2 : 0);
  return r;
}

DecodeResult ideal_decode(const Frame& block_frame, const CodeSpec& code) {
  static std::mutex mu;
  static std::map<std::string, IdealDecoder> cache;
  std::ostringstream key;
  key << code.name << '/' << code.block_size << '/' << static_cast<int>(code.error_model);
  for (const auto& s : code.stabilizers) key << '/' << s.x << ':' << s.z;
  key << '/' << code.logical_x.x << ':' << code.logical_x.z << '/' << code.logical_z.x << ':'
      << code.logical_z.z;
  const IdealDecoder* dec = nullptr;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key.str());
    if (it == cache.end()) it = cache.emplace(key.str(), IdealDecoder(code)).first;
    dec = &it->second;
  }
  return dec->decode(block_frame);
}

std::vector<int> decode_blocks(const IdealDecoder& dec, const Frame& frame, int blocks) {
  const int n = dec.code().block_size;
  std::vector<int> out(blocks);
  for (int b = 0; b < blocks; ++b) out[b] = dec.decode(sub_frame(frame, b * n, n)).logical;
  return out;
}

namespace {

int total_deviation(const IdealDecoder& dec, const Frame& frame, int blocks) {
  const int n = dec.code().block_size;
  int d = 0;
  for (int b = 0; b < blocks; ++b) d += dec.decode(sub_frame(frame, b * n, n)).deviation;
  return d;
}

Frame data_part(const Frame& f, int data_qubits) { return sub_frame(f, 0, data_qubits); }

// All data frames of weight exactly r (any weight when r < 0).
template <typename Visitor>
bool enumerate_inputs(int data_qubits, ErrorModel model, int r, Visitor&& visit) {
  const std::uint64_t full = (1ULL << data_qubits) - 1;
  const std::uint64_t zmax = model == ErrorModel::BitFlip ? 0 : full;
  for (std::uint64_t z = 0; z <= zmax; ++z) {
    for (std::uint64_t x = 0; x <= full; ++x) {
      const Frame f{x, z};
      if (r >= 0 && f.weight() != r) continue;
      if (!visit(f)) return false;
    }
  }
  return true;
}

std::string describe(const std::vector<int>& logical) {
  std::string s;
  for (int l : logical) s += std::to_string(l);
  return s;
}

}  // namespace

namespace detail {

std::vector<Frame> fault_paulis(std::uint64_t support, ErrorModel model) {
  std::vector<int> qs;
  for (int q = 0; q < 64; ++q) {
    if ((support >> q) & 1u) qs.push_back(q);
  }
  const int k = static_cast<int>(qs.size());
  std::vector<Frame> out;
  const std::uint64_t combos = model == ErrorModel::BitFlip ? (1ULL << k) : (1ULL << (2 * k));
  for (std::uint64_t c = 1; c < combos; ++c) {
    Frame f;
    for (int q = 0; q < k; ++q) {
      if ((c >> q) & 1u) f.x |= 1ULL << qs[q];
      if (model == ErrorModel::Pauli && ((c >> (k + q)) & 1u)) f.z |= 1ULL << qs[q];
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace detail

std::vector<int> apply_logical(LogicalAction action, std::vector<int> logical) {
  if (action == LogicalAction::CX && logical.size() >= 2) {
    const int x0 = logical[0] & 1, z1 = (logical[1] >> 1) & 1;
    logical[1] ^= x0;
    logical[0] ^= z1 << 1;
  }
  return logical;
}

ConditionReport check_gadget_conditions(const GadgetCircuit& gadget, const CodeSpec& code,
                                        int t, int max_faults, std::uint64_t cap) {
  if (gadget.block_size != code.block_size) {
    throw ConfigError("gadget block size does not match the code");
  }
  ConditionReport rep;
  const IdealDecoder dec(code);
  const int D = gadget.data_qubits();
  const int B = gadget.blocks;
  const ErrorModel model = code.error_model;
  max_faults = std::min(max_faults, t);

  for (int total = 0; total <= t && !rep.counterexample && !rep.partial; ++total) {
    for (int r = total; r >= 0 && !rep.counterexample && !rep.partial; --r) {
      const int s = total - r;
      if (s > max_faults) continue;
      enumerate_inputs(D, model, r, [&](const Frame& in) {
        const auto expected = apply_logical(gadget.action, decode_blocks(dec, in, B));
        return enumerate_faults(gadget, s, model, [&](const std::vector<GadgetFault>& faults) {
          if (++rep.a1_cases > cap) {
            rep.partial = true;
            return false;
          }
          const Frame out = data_part(run_gadget(gadget, in, faults), D);
          const auto got = decode_blocks(dec, out, B);
          const int dev = total_deviation(dec, out, B);
          if (got != expected || dev > s) {
            rep.a1 = false;
            rep.counterexample = Counterexample{
                "A1", in, faults, out,
                "r=" + std::to_string(r) + " s=" + std::to_string(s) + " expected logical " +
                    describe(expected) + " got " + describe(got) + " deviation " +
                    std::to_string(dev)};
            return false;
          }
          return true;
        });
      });
    }
  }

  if (gadget.role == GadgetRole::EC) {
    for (int s = 0; s <= max_faults && !rep.counterexample && !rep.partial; ++s) {
      enumerate_inputs(D, model, -1, [&](const Frame& in) {
        return enumerate_faults(gadget, s, model, [&](const std::vector<GadgetFault>& faults) {
          if (++rep.a2_cases > cap) {
            rep.partial = true;
            return false;
          }
          const Frame out = data_part(run_gadget(gadget, in, faults), D);
          const int dev = total_deviation(dec, out, B);
          if (dev > s) {
            rep.a2 = false;
            rep.counterexample = Counterexample{
                "A2", in, faults, out,
                "s=" + std::to_string(s) + " output deviation " + std::to_string(dev)};
            return false;
          }
          return true;
        });
      });
    }
  }
  return rep;
}

GadgetCircuit build_exrec(const GadgetCircuit& ec, const GadgetCircuit& gate, int* lec_end) {
  const int n = ec.block_size;
  const int B = gate.blocks;
  const int anc = ec.width - n;
  const int width = B * n + B * anc;
  if (gate.block_size != n || gate.width != B * n) {
    throw ConfigError("exRec gate must act on bare data blocks of the EC code");
  }
  auto ec_on = [&](int b) {
    std::vector<int> map(ec.width);
    for (int q = 0; q < ec.width; ++q) map[q] = q < n ? b * n + q : B * n + b * anc + (q - n);
    return embed(ec, map, width);
  };
  std::vector<GadgetCircuit> parts;
  for (int b = 0; b < B; ++b) parts.push_back(ec_on(b));
  std::vector<int> id(gate.width);
  for (int q = 0; q < gate.width; ++q) id[q] = q;
  int lec_ops = 0;
  for (const auto& p : parts) lec_ops += static_cast<int>(p.ops.size());
  parts.push_back(embed(gate, id, width));
  for (int b = 0; b < B; ++b) parts.push_back(ec_on(b));
  auto out = concat("exrec_" + gate.name, parts);
  out.blocks = B;
  out.block_size = n;
  out.width = width;
  out.action = gate.action;
  if (lec_end) *lec_end = lec_ops;
  return out;
}

ExRecCheck check_exrec_correctness(const GadgetCircuit& ec, const GadgetCircuit& gate,
                                     const CodeSpec& code, int max_faults) {
  int lec_end = 0;
  const GadgetCircuit exrec = build_exrec(ec, gate, &lec_end);
  GadgetCircuit lec = exrec;
  lec.ops.resize(lec_end);
  const IdealDecoder dec(code);
  const int D = exrec.data_qubits();
  const int B = exrec.blocks;
  ExRecCheck rep;
  for (int s = 0; s <= max_faults && rep.pass; ++s) {
    enumerate_inputs(D, code.error_model, -1, [&](const Frame& in) {
      return enumerate_faults(exrec, s, code.error_model, [&](const std::vector<GadgetFault>& f) {
        ++rep.cases;
        std::vector<GadgetFault> lec_faults;
        for (const auto& g : f) {
          if (g.location < lec_end) lec_faults.push_back(g);
        }
        const Frame lec_out = data_part(run_gadget(lec, in, lec_faults), D);
        const Frame out = data_part(run_gadget(exrec, in, f), D);
        const auto expected = apply_logical(exrec.action, decode_blocks(dec, lec_out, B));
        const auto got = decode_blocks(dec, out, B);
        if (expected != got) {
          rep.pass = false;
          rep.counterexample = Counterexample{"exRec", in, f, out,
                                              "expected logical " + describe(expected) +
                                                  " got " + describe(got)};
          return false;
        }
        return true;
      });
    });
  }
  return rep;
}

void classical_data_step(LatticeState& lattice) {
  if (lattice.data_kind() != DataKind::ClassicalBit) {
    throw ConfigError("classical data step requires classical-bit data");
  }
  const std::vector<std::uint32_t> in(lattice.data_plane().begin(), lattice.data_plane().end());
  toom_step<std::uint32_t>(in, lattice.data_plane(), lattice.n());
}

std::string to_string(Logical v) {
  switch (v) {
    case Logical::Zero: return "0";
    case Logical::One: return "1";
    case Logical::Tie: return "tie";
  }
  return "tie";
}

Logical logical_readout(const LatticeState& lattice, const CodeSpec* code) {
  std::size_t ones = 0;
  const std::size_t N = lattice.size();
  if (lattice.data_kind() == DataKind::PauliFrame) {
    const CodeSpec fallback = rep3_code();
    const CodeSpec& c = code ? *code : fallback;
    if (c.block_size != lattice.block_size()) {
      throw ConfigError("code block size does not match the lattice data blocks");
    }
    const IdealDecoder dec(c);
    for (std::size_t k = 0; k < N; ++k) {
      const Frame f{lattice.data_plane()[k], lattice.data_z_plane()[k]};
      ones += dec.decode(f).logical & 1;
    }
  } else {
    for (std::size_t k = 0; k < N; ++k) ones += lattice.data_plane()[k] & 1u;
  }
  if (2 * ones == N) return Logical::Tie;
  return 2 * ones > N ? Logical::One : Logical::Zero;
}

}  // namespace toomqca
