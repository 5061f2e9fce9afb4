#include <doctest.h>

#include <cmath>
#include <sstream>

#include "toomqca/errors.hpp"
#include "toomqca/noise.hpp"
#include "toomqca/rng.hpp"

using namespace toomqca;

TEST_CASE("fault decisions are pure functions of (seed, time, op)") {
  const Location loc{12, 345, LocationKind::Structure, {{1, 2}}};
  const bool a = location_faulted(loc, 0.3, 99);
  for (int k = 0; k < 5; ++k) CHECK(location_faulted(loc, 0.3, 99) == a);
  CHECK_FALSE(location_faulted(loc, 0.0, 99));
  CHECK(location_faulted(loc, 1.0, 99));
}

TEST_CASE("empirical fault rate matches p") {
  const double p = 0.1;
  const int N = 200000;
  int hits = 0;
  for (int k = 0; k < N; ++k) hits += keyed_bernoulli(5, static_cast<std::uint64_t>(k), 17, p);
  const double sigma = std::sqrt(N * p * (1 - p));
  CHECK(std::abs(hits - N * p) < 4 * sigma);
}

TEST_CASE("eta is the square root of p") {
  CHECK(eta_from_p(0.01) == doctest::Approx(0.1));
  NoiseParams n;
  n.p = 0.04;
  CHECK(n.eta() == doctest::Approx(0.2));
}

TEST_CASE("op ids encode kind and owner") {
  const Site s{3, 5};
  const auto id = location_op_id(LocationKind::Data, s, 8);
  CHECK(id == 64 + 3 * 8 + 5);
  CHECK(location_owner(id, 8) == s);
}

TEST_CASE("structure locations cover every site once") {
  const auto sync = structure_locations(6, 4);
  CHECK(sync.size() == 36);
  for (const auto& l : sync) CHECK(l.support.size() == 3);
  const auto async = structure_locations(6, 4, true);
  for (const auto& l : async) CHECK(l.support.size() == 1);
}

TEST_CASE("effects are confined to the support") {
  ScheduleParams p;
  IdealInit init;
  init.data_kind = DataKind::PauliFrame;
  LatticeState lat = new_lattice(24, p, init);
  const EffectContext ctx = EffectContext::of(lat);
  for (std::uint64_t seed = 1; seed < 40; ++seed) {
    const Site s{static_cast<int>(seed % 24), static_cast<int>((seed * 7) % 24)};
    for (auto kind : {LocationKind::Structure, LocationKind::Data}) {
      Location loc{static_cast<std::int64_t>(seed), location_op_id(kind, s, 24), kind,
                   {s, neighbor(s, Direction::North, 24)}};
      const FaultEvent ev = draw_effect(loc, ctx, seed);
      LatticeState after = lat;
      apply_fault(after, ev);
      CHECK(change_confined(lat, after, ev));
      if (kind == LocationKind::Data) {
        bool any = false;
        for (const auto& pl : ev.payload) any |= (pl.x | pl.z) != 0;
        CHECK(any);
      }
    }
  }
}

TEST_CASE("faults outside the lattice are rejected") {
  ScheduleParams p;
  LatticeState lat = new_lattice(24, p);
  FaultEvent ev;
  ev.location = {0, 0, LocationKind::Structure, {{30, 0}}};
  ev.payload = {SitePayload{}};
  CHECK_THROWS_AS(apply_fault(lat, ev), ConfigError);
}

TEST_CASE("fault paths round-trip through text") {
  ScheduleParams p;
  LatticeState lat = new_lattice(24, p);
  const auto locs = structure_locations(24, 3);
  const auto events = sample_faults(locs, 0.05, 21, EffectContext::of(lat));
  REQUIRE(!events.empty());
  FaultPath path;
  path.events = events;
  path.seed = 21;
  path.p = 0.05;
  std::stringstream ss;
  write_fault_path(ss, path);
  const FaultPath back = read_fault_path(ss);
  REQUIRE(back.events.size() == path.events.size());
  CHECK(back.seed == 21);
  for (std::size_t k = 0; k < back.events.size(); ++k) {
    CHECK(back.events[k].location.time == path.events[k].location.time);
    CHECK(back.events[k].location.op_id == path.events[k].location.op_id);
    CHECK(back.events[k].location.support == path.events[k].location.support);
    CHECK(back.events[k].payload == path.events[k].payload);
  }
}
