#include <doctest.h>

#include <sstream>

#include "toomqca/errors.hpp"
#include "toomqca/schedule.hpp"
#include "toomqca/structure.hpp"

using namespace toomqca;

namespace {

LatticeState frame_lattice(int n) {
  ScheduleParams p;
  IdealInit init;
  init.data_kind = DataKind::PauliFrame;
  return new_lattice(n, p, init);
}

CycleConfig stabilizer_cycle(bool gating) {
  CycleConfig c;
  c.table = ScheduleTable::builtin("stabilizer");
  c.code = rep3_code();
  c.gating = gating;
  return c;
}

}  // namespace

TEST_CASE("built-in schedule tables") {
  ScheduleParams p;
  const auto id = ScheduleTable::builtin("identity");
  const auto rep = ScheduleTable::builtin("repetition");
  const auto stab = ScheduleTable::builtin("stabilizer");
  CHECK(id.lookup(20, 3, 3, p) == GateKind::Idle);
  CHECK(rep.lookup(20, 3, 3, p) == GateKind::ToomMaj);
  CHECK(rep.lookup(5, 3, 3, p) == GateKind::Idle);  // refresh phase
  CHECK(stab.lookup(18, 0, 0, p) == GateKind::Ec);
  CHECK(stab.lookup(19, 0, 1, p) == GateKind::CnotEast);
  CHECK(stab.lookup(19, 0, 2, p) == GateKind::Idle);
  CHECK(stab.lookup(21, 23, 0, p) == GateKind::CnotNorth);
  CHECK(stab.has_two_site_gates());
  CHECK_FALSE(rep.has_two_site_gates());
  CHECK_THROWS_AS(ScheduleTable::builtin("nope"), ConfigError);
}

TEST_CASE("schedule grammar") {
  std::istringstream ok("# comment\nsim 1 edge even flip\nsim * 3 * ec\n");
  const auto t = ScheduleTable::parse(ok);
  ScheduleParams p;
  CHECK(t.lookup(19, 23, 4, p) == GateKind::Flip);
  CHECK(t.lookup(19, 22, 4, p) == GateKind::Idle);
  CHECK(t.lookup(22, 3, 9, p) == GateKind::Ec);

  std::istringstream refresh("refresh 0 * * flip\n");
  CHECK_THROWS_AS(ScheduleTable::parse(refresh), ConfigError);
  std::istringstream short_line("sim 0 *\n");
  CHECK_THROWS_AS(ScheduleTable::parse(short_line), ConfigError);
  std::istringstream bad_gate("sim 0 * * teleport\n");
  CHECK_THROWS_AS(ScheduleTable::parse(bad_gate), ConfigError);
}

TEST_CASE("coordinate consistency") {
  ScheduleParams p;
  CHECK(coord_consistent({3, 23, 4}, {3, 0, 4}, Direction::North, p));
  CHECK(coord_consistent({3, 2, 23}, {3, 2, 0}, Direction::East, p));
  CHECK_FALSE(coord_consistent({3, 2, 5}, {3, 2, 7}, Direction::East, p));
  CHECK_FALSE(coord_consistent({3, 2, 5}, {4, 2, 6}, Direction::East, p));
}

TEST_CASE("recorded gate calls match the nominal schedule on the ideal trajectory") {
  LatticeState lat = frame_lattice(48);
  const auto cfg = stabilizer_cycle(true);
  const auto expected = nominal_calls(lat, cfg.table, lat.global_time());
  CycleInstrumentation inst;
  inst.record_calls = true;
  run_cycle(lat, cfg, NoiseParams{}, &inst);
  CHECK(inst.calls == expected);
  CHECK(inst.gated_calls == 0);
  CHECK(inst.inconsistent_cross_block_executions == 0);
  CHECK(count_C_bound(inst) == 0);
  CHECK(inst.cross_block_calls > 0);
}

TEST_CASE("noiseless cycles preserve the structure and an error-free frame") {
  LatticeState lat = frame_lattice(48);
  const LatticeState start = lat;
  const auto cfg = stabilizer_cycle(true);
  run_cycle(lat, cfg, NoiseParams{});
  run_cycle(lat, cfg, NoiseParams{});
  CHECK(lat.global_time() == 48);
  CHECK(singular_sites(lat, lat.global_time()).empty());
  for (std::size_t k = 0; k < lat.size(); ++k) CHECK(lat.data(lat.site(k)) == start.data(start.site(k)));
}

TEST_CASE("gating blocks cross-block gates between inconsistent neighbours") {
  for (bool gating : {true, false}) {
    LatticeState lat = frame_lattice(24);
    auto cfg = stabilizer_cycle(gating);
    CycleRunner runner(cfg, lat);
    // Advance to the step where cnot_e fires on odd y.
    for (int t = 0; t < lat.params().T_ref + 1; ++t) runner.step(lat, NoiseParams{});
    auto st = lat.structure({1, 0});
    st.y = 5;
    lat.set_structure({1, 0}, st);
    CycleInstrumentation inst;
    runner.step(lat, NoiseParams{}, &inst);
    if (gating) {
      CHECK(inst.gated_calls >= 1);
      CHECK(inst.inconsistent_cross_block_executions == 0);
    } else {
      CHECK(inst.gated_calls == 0);
      CHECK(inst.inconsistent_cross_block_executions >= 1);
    }
  }
}

TEST_CASE("the repetition schedule corrects an isolated data flip") {
  ScheduleParams p;
  LatticeState lat = new_lattice(24, p);
  lat.set_data({4, 4}, ClassicalBit{1});
  CycleConfig cfg;
  cfg.table = ScheduleTable::builtin("repetition");
  run_cycle(lat, cfg, NoiseParams{});
  for (std::size_t k = 0; k < lat.size(); ++k) {
    CHECK(std::get<ClassicalBit>(lat.data(lat.site(k))).value == 0);
  }
}
