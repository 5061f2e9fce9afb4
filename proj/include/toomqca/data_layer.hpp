#pragma once

// Data rules: classical repetition bit under Toom correction, and
// stabilizer codes tracked as Pauli frames, with the ideal decoder and the
// gadget-condition checker.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "toomqca/lattice.hpp"
#include "toomqca/pauli.hpp"

namespace toomqca {

enum class ErrorModel : std::uint8_t { BitFlip, Pauli };

struct CodeSpec {
  std::string name;
  int block_size = 3;
  int t = 1;  // correctable errors
  ErrorModel error_model = ErrorModel::BitFlip;
  std::vector<Frame> stabilizers;
  Frame logical_x;
  Frame logical_z;
};

// Parses "IXYZ" strings into a frame (qubit k = character k).
Frame parse_pauli(const std::string& s);
std::string pauli_string(const Frame& f, int width);

// Text table: name / t / error_model bitflip|pauli / stabilizer P /
// logical_x P / logical_z P. Throws ConfigError if generators do not commute.
CodeSpec parse_code(std::istream& in);
CodeSpec load_code(const std::string& path);
CodeSpec rep3_code();
CodeSpec steane_code();

inline bool anticommute(const Frame& a, const Frame& b) {
  return (std::popcount((a.x & b.z) ^ (a.z & b.x)) & 1) != 0;
}

struct DecodeResult {
  // Residual logical operator after correction: bit 0 = X_L component,
  // bit 1 = Z_L component.
  int logical = 0;
  std::uint32_t syndrome = 0;
  Frame correction;
  int deviation = 0;  // weight of the minimum-weight correction
};

// Minimum-weight syndrome decoding through a lookup table built once per
// code. Under the bit-flip model only the X part of the frame is decoded.
class IdealDecoder {
 public:
  explicit IdealDecoder(CodeSpec code);
  const CodeSpec& code() const { return code_; }
  std::uint32_t syndrome(const Frame& f) const;
  DecodeResult decode(const Frame& block_frame) const;

 private:
  CodeSpec code_;
  std::vector<Frame> table_;
  std::vector<bool> filled_;
};

DecodeResult ideal_decode(const Frame& block_frame, const CodeSpec& code);

// Logical value of each block of a multi-block frame.
std::vector<int> decode_blocks(const IdealDecoder& dec, const Frame& frame, int blocks);

// The logical action applied to per-block logical Paulis.
std::vector<int> apply_logical(LogicalAction action, std::vector<int> logical);

struct Counterexample {
  std::string condition;  // "A1" or "A2"
  Frame input;
  std::vector<GadgetFault> faults;
  Frame output;
  std::string detail;
};

struct ConditionReport {
  bool a1 = true;
  bool a2 = true;
  bool partial = false;  // enumeration cap reached
  std::uint64_t a1_cases = 0;
  std::uint64_t a2_cases = 0;
  std::optional<Counterexample> counterexample;

  bool pass() const { return a1 && a2 && !partial; }
};

// Exhaustive check of the gadget conditions for r input errors and s faults:
//   A1: r + s <= t: output decodes to the ideal action applied to the
//       decoded input, and lies within s errors of a codeword;
//   A2: any input, s <= max_faults: output within s errors of a codeword.
// A2 applies to EC gadgets only.
ConditionReport check_gadget_conditions(const GadgetCircuit& gadget, const CodeSpec& code,
                                        int t, int max_faults,
                                        std::uint64_t cap = 50'000'000);

// All faults of exactly `s` distinct locations with non-identity Paulis on
// their supports, visited lexicographically. The visitor returns false to stop.
template <typename Visitor>
bool enumerate_faults(const GadgetCircuit& g, int s, ErrorModel model, Visitor&& visit);

struct ExRecCheck {
  bool pass = true;
  std::uint64_t cases = 0;
  std::optional<Counterexample> counterexample;
};

// Leading EC on each block, the gate, trailing EC on each block. For every
// input X/Z frame on the data and at most `max_faults` faults anywhere in
// the extended rectangle, checks that decoding the output equals the ideal
// gate applied to the decoding of the leading-EC output.
ExRecCheck check_exrec_correctness(const GadgetCircuit& ec, const GadgetCircuit& gate,
                                     const CodeSpec& code, int max_faults);

// Builds LEC-gate-TEC with ancillas of each EC placed after the data qubits.
GadgetCircuit build_exrec(const GadgetCircuit& ec, const GadgetCircuit& gate,
                          int* lec_end = nullptr);

// Plain Toom step on the data-bit plane. Requires ClassicalBit data.
void classical_data_step(LatticeState& lattice);

enum class Logical : std::uint8_t { Zero, One, Tie };
std::string to_string(Logical v);

// ClassicalBit: global majority of the data plane. PauliFrame: ideal
// decoding of each site's block (X_L component), then majority.
Logical logical_readout(const LatticeState& lattice, const CodeSpec* code = nullptr);

// ---- implementation of the template ----

namespace detail {
std::vector<Frame> fault_paulis(std::uint64_t support, ErrorModel model);
}

template <typename Visitor>
bool enumerate_faults(const GadgetCircuit& g, int s, ErrorModel model, Visitor&& visit) {
  const int L = static_cast<int>(g.ops.size());
  std::vector<std::vector<Frame>> options(L);
  for (int l = 0; l < L; ++l) options[l] = detail::fault_paulis(support_mask(g.ops[l]), model);
  std::vector<GadgetFault> faults(s);
  auto rec = [&](auto&& self, int pos, int first) -> bool {
    if (pos == s) return visit(static_cast<const std::vector<GadgetFault>&>(faults));
    for (int l = first; l < L; ++l) {
      for (const Frame& p : options[l]) {
        faults[pos] = {l, p};
        if (!self(self, pos + 1, l + 1)) return false;
      }
    }
    return true;
  };
  return rec(rec, 0, 0);
}

}  // namespace toomqca
