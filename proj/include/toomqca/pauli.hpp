#pragma once

// Pauli-frame propagation through measurement-free Clifford gadgets.
// Qubit k of a frame is bit k of the x and z masks.

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace toomqca {

struct Frame {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  int weight() const { return std::popcount(x | z); }
  bool identity() const { return (x | z) == 0; }
  Frame& operator^=(const Frame& o) {
    x ^= o.x;
    z ^= o.z;
    return *this;
  }
  friend Frame operator^(Frame a, const Frame& b) { return a ^= b; }
  friend bool operator==(const Frame&, const Frame&) = default;
};

// Restriction of a frame to qubits [offset, offset + width), shifted to 0.
inline Frame sub_frame(const Frame& f, int offset, int width) {
  const std::uint64_t m = width >= 64 ? ~0ULL : ((1ULL << width) - 1);
  return {(f.x >> offset) & m, (f.z >> offset) & m};
}

inline Frame place_frame(const Frame& f, int offset) { return {f.x << offset, f.z << offset}; }

enum class GateOp : std::uint8_t {
  Idle,
  X,
  Y,
  Z,
  H,
  S,
  CX,
  CZ,
  Swap,
  Reset,
  // X on the last qubit controlled by the others matching `pattern`.
  // Controls are ancillas whose ideal value is 0, so the correction fires
  // exactly when their X-frame bits equal the pattern.
  Mcx,
  T,
  CCX,
};

std::string to_string(GateOp op);
GateOp gate_op_from_string(const std::string& name);

struct GadgetOp {
  GateOp op = GateOp::Idle;
  std::vector<int> qubits;
  std::uint32_t pattern = 0;  // Mcx: bit k refers to control k
};

enum class GadgetRole : std::uint8_t { Prep, Gate1, Gate2, EC, Measure };

// Logical action the gadget is meant to implement on its blocks.
enum class LogicalAction : std::uint8_t { Identity, CX };

struct GadgetCircuit {
  std::string name;
  GadgetRole role = GadgetRole::EC;
  LogicalAction action = LogicalAction::Identity;
  int blocks = 1;
  int block_size = 3;
  int width = 3;  // data qubits first, block b at [b*block_size, (b+1)*block_size)
  std::vector<GadgetOp> ops;

  int data_qubits() const { return blocks * block_size; }
};

// A Pauli fault applied right after location `location` (index into ops).
// The fault's masks must lie on that location's qubits.
struct GadgetFault {
  int location = 0;
  Frame pauli;
};

// Propagates the frame through the circuit with faults injected. Throws
// UnsupportedGate for non-Clifford tags.
Frame run_gadget(const GadgetCircuit& gadget, const Frame& input,
                 const std::vector<GadgetFault>& faults = {});

// Mask of the qubits touched by one location.
std::uint64_t support_mask(const GadgetOp& op);

// Text format, one location per line:
//   name <id> / role ec|gate1|gate2|prep|measure / action identity|cx
//   blocks <b> / block_size <n> / width <w>
//   <gate> q...           e.g. "cx 0 3", "reset 4"
//   mcx c... -> t pattern <bits>
GadgetCircuit parse_gadget(std::istream& in);
GadgetCircuit load_gadget(const std::string& path);

// Measurement-free EC for the 3-bit repetition code: three pairwise parity
// ancillas, ancilla-controlled correction, ancilla reset at start and end.
GadgetCircuit rep3_ec_gadget();
// Same circuit without the correction locations.
GadgetCircuit rep3_ec_without_correction();
// Transversal idle and transversal CNOT between two repetition blocks.
GadgetCircuit rep3_idle_gadget();
GadgetCircuit rep3_cnot_gadget();
// Identity gadget: one idle location per data qubit.
GadgetCircuit identity_gadget(int block_size);

// Sequential composition; widths and blocks must match after embedding.
// `qubit_map[k]` places qubit k of `part` inside the composite.
GadgetCircuit embed(const GadgetCircuit& part, const std::vector<int>& qubit_map, int width);
GadgetCircuit concat(const std::string& name, const std::vector<GadgetCircuit>& parts);

}  // namespace toomqca
