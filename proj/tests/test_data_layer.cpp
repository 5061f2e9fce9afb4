#include <doctest.h>

#include <sstream>

#include "toomqca/data_layer.hpp"
#include "toomqca/errors.hpp"

using namespace toomqca;

TEST_CASE("Pauli strings") {
  const Frame f = parse_pauli("XIZY");
  CHECK(f.x == 0b1001);
  CHECK(f.z == 0b1100);
  CHECK(pauli_string(f, 4) == "XIZY");
  CHECK(anticommute(parse_pauli("X"), parse_pauli("Z")));
  CHECK_FALSE(anticommute(parse_pauli("XX"), parse_pauli("ZZ")));
}

TEST_CASE("repetition code decoding by hand") {
  const CodeSpec c = rep3_code();
  const IdealDecoder dec(c);
  CHECK(dec.decode(parse_pauli("III")).logical == 0);
  for (const char* w1 : {"XII", "IXI", "IIX"}) {
    const auto r = dec.decode(parse_pauli(w1));
    CHECK(r.logical == 0);
    CHECK(r.deviation == 1);
  }
  CHECK((dec.decode(parse_pauli("XXI")).logical & 1) == 1);
  CHECK((dec.decode(parse_pauli("XXX")).logical & 1) == 1);
  CHECK(dec.syndrome(parse_pauli("XII")) != dec.syndrome(parse_pauli("IXI")));
}

TEST_CASE("Steane code corrects every single-qubit Pauli") {
  const CodeSpec c = steane_code();
  CHECK(c.block_size == 7);
  CHECK(c.stabilizers.size() == 6);
  const IdealDecoder dec(c);
  for (int q = 0; q < 7; ++q) {
    for (const char p : {'X', 'Y', 'Z'}) {
      std::string s(7, 'I');
      s[q] = p;
      CHECK(dec.decode(parse_pauli(s)).logical == 0);
    }
  }
  CHECK(dec.decode(c.logical_x).logical == 1);
  CHECK(dec.decode(c.logical_z).logical == 2);
}

TEST_CASE("codes with anticommuting generators are rejected") {
  std::istringstream in("name bad\nt 1\nerror_model pauli\nstabilizer XI\nstabilizer ZI\n"
                        "logical_x IX\nlogical_z IZ\n");
  CHECK_THROWS_AS(parse_code(in), ConfigError);
}

TEST_CASE("logical CX action") {
  // Per block: bit 0 = X_L, bit 1 = Z_L. CX copies X forward and Z back.
  CHECK(apply_logical(LogicalAction::CX, {1, 0}) == std::vector<int>{1, 1});
  CHECK(apply_logical(LogicalAction::CX, {0, 2}) == std::vector<int>{2, 2});
  CHECK(apply_logical(LogicalAction::Identity, {3, 1}) == std::vector<int>{3, 1});
}

TEST_CASE("gadget propagation by hand") {
  GadgetCircuit g;
  g.name = "cx";
  g.width = 2;
  g.block_size = 2;
  g.ops = {{GateOp::CX, {0, 1}, 0}};
  CHECK(run_gadget(g, parse_pauli("XI")) == parse_pauli("XX"));
  CHECK(run_gadget(g, parse_pauli("IZ")) == parse_pauli("ZZ"));
  CHECK(run_gadget(g, {}, {{0, parse_pauli("IX")}}) == parse_pauli("IX"));
  g.ops.push_back({GateOp::T, {0}, 0});
  CHECK_THROWS_AS(run_gadget(g, {}), UnsupportedGate);
}

TEST_CASE("measurement-free repetition EC gadget passes exhaustive checking") {
  const auto rep = check_gadget_conditions(rep3_ec_gadget(), rep3_code(), 1, 1);
  CHECK(rep.pass());
  CHECK(rep.a1_cases > 0);
  CHECK(rep.a2_cases > 0);
  CHECK_FALSE(rep.counterexample.has_value());
}

TEST_CASE("the correction-deleted mutant fails with a counterexample") {
  const auto rep = check_gadget_conditions(rep3_ec_without_correction(), rep3_code(), 1, 1);
  CHECK_FALSE(rep.pass());
  REQUIRE(rep.counterexample.has_value());
  CHECK(rep.counterexample->condition == "A1");
  CHECK(rep.counterexample->input.weight() + rep.counterexample->faults.size() <= 1);
}

TEST_CASE("gadget text format round trip") {
  std::istringstream in(
      "name idle\nrole ec\naction identity\nblocks 1\nblock_size 3\nwidth 3\nidle 0\nidle 1\n");
  const auto g = parse_gadget(in);
  CHECK(g.name == "idle");
  CHECK(g.ops.size() == 2);
  CHECK(g.width == 3);
}

TEST_CASE("exRec correctness on the repetition code") {
  CHECK(check_exrec_correctness(rep3_ec_gadget(), rep3_idle_gadget(), rep3_code(), 1).pass);
  const auto cx = check_exrec_correctness(rep3_ec_gadget(), rep3_cnot_gadget(), rep3_code(), 1);
  CHECK(cx.pass);
  CHECK(cx.cases > 0);
}

TEST_CASE("classical readout is a global majority") {
  ScheduleParams p;
  LatticeState lat = new_lattice(24, p);
  CHECK(logical_readout(lat) == Logical::Zero);
  for (int j = 0; j < 24; ++j) {
    for (int i = 0; i < 12; ++i) lat.set_data({i, j}, ClassicalBit{1});
  }
  CHECK(logical_readout(lat) == Logical::Tie);
  lat.set_data({20, 0}, ClassicalBit{1});
  CHECK(logical_readout(lat) == Logical::One);
}
