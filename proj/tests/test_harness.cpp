#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "toomqca/errors.hpp"
#include "toomqca/harness.hpp"

using namespace toomqca;

namespace {

std::string temp_stem(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "toomqca_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

bool rejects_with(const Json& overrides, const std::string& needle) {
  try {
    parse_config("run-sync", "", overrides);
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("empty config resolves to the defaults") {
  const RunConfig cfg = parse_config("run-sync", "");
  const ScheduleParams p = cfg.params;
  CHECK(p.M == 24);
  CHECK(p.T_ref == 18);
  CHECK(p.T_code == 6);
  CHECK(p.T_sim == 1);
  CHECK(p.t_EC_S == 6);
  CHECK(p.w == 3);
  CHECK(p.violations().empty());
  CHECK(cfg.options == default_options("run-sync"));
}

TEST_CASE("violated inequalities are rejected by name") {
  CHECK(rejects_with({{"params", {{"T_ref", 10}, {"M", 24}}}}, "T_ref >= w*t_EC_S"));
  CHECK(rejects_with({{"params", {{"M", 20}}}}, "M >= T0 (20 < 24)"));
  CHECK(rejects_with({{"params", {{"Q", 1}}}}, "Q"));
  CHECK(rejects_with({{"options", {{"no_such_option", 1}}}}, "no_such_option"));
  CHECK_THROWS_AS(default_options("fly"), ConfigError);
}

TEST_CASE("flags override the config file") {
  const std::string path = temp_stem("cfg.json");
  write_file(path, R"({"seed": 9, "params": {"M": 32}, "options": {"n": 64, "steps": 5}})");
  const RunConfig cfg = parse_config("run-sync", path, {{"options", {{"steps", 7}}}});
  CHECK(cfg.seed == 9);
  CHECK(cfg.params.M == 32);
  CHECK(cfg.options["n"] == 64);
  CHECK(cfg.options["steps"] == 7);
  CHECK_THROWS_AS(parse_config("run-sync", temp_stem("missing.json")), ConfigError);
}

TEST_CASE("config and manifest round trip") {
  RunConfig cfg = parse_config("lifetime", "", {{"seed", 77}, {"options", {{"L", {8, 16}}}}});
  CHECK(RunConfig::from_json(cfg.to_json()) == cfg);
  RunManifest m;
  m.config = cfg;
  m.started = utc_timestamp();
  m.finished = m.started;
  m.outputs = {{"a.csv", sha256_hex("abc")}};
  const RunManifest back = RunManifest::from_json(m.to_json());
  CHECK(back.config == cfg);
  CHECK(back.tool_version == kToolVersion);
  REQUIRE(back.outputs.size() == 1);
  CHECK(back.outputs[0].sha256 == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("threshold-flow table") {
  const RunConfig cfg = parse_config("threshold-flow", "");
  const auto out = run_experiment(cfg);
  REQUIRE(out.tables.size() == 1);
  const CsvTable& t = out.tables[0].second;
  CHECK(t.header == std::vector<std::string>{"level", "eta", "log10_eta", "log10_closed_form", "eta_th"});
  REQUIRE(t.rows.size() == 4);
  for (const auto& row : t.rows) CHECK(row[4] == "0.01");
  CHECK(std::stod(t.rows[3][1]) == doctest::Approx(0.01 / 256).epsilon(1e-12));
  CHECK(t.str().rfind("level,eta,log10_eta,log10_closed_form,eta_th\n0,0.005,", 0) == 0);
}

TEST_CASE("CSV number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) CHECK(std::stod(fmt(v)) == v);
  CHECK(fmt(true) == "1");
  CHECK(fmt(std::uint64_t{42}) == "42");
}

TEST_CASE("two runs of one config give byte-identical outputs") {
  for (const char* cmd : {"run-sync", "lifetime", "erosion-test"}) {
    Json o = {{"options", Json::object()}};
    if (std::string(cmd) == "run-sync") o["options"] = {{"n", 24}, {"steps", 30}, {"p", 0.01}};
    if (std::string(cmd) == "lifetime") o["options"] = {{"L", {8, 16}}, {"p", {0.2}}, {"trials", 8}, {"cap", 500}};
    if (std::string(cmd) == "erosion-test") o["options"] = {{"n", 32}, {"trials", 50}};
    const RunConfig cfg = parse_config(cmd, "", o);
    const auto a = write_outputs(temp_stem(std::string(cmd) + "_a"), cfg, run_experiment(cfg), utc_timestamp());
    const auto b = write_outputs(temp_stem(std::string(cmd) + "_b"), cfg, run_experiment(cfg), utc_timestamp());
    REQUIRE(a.outputs.size() == b.outputs.size());
    for (std::size_t k = 0; k < a.outputs.size(); ++k) CHECK(a.outputs[k].sha256 == b.outputs[k].sha256);
    const RunManifest back = read_manifest(temp_stem(std::string(cmd) + "_a") + ".manifest.json");
    CHECK(back.config == cfg);
  }
}

TEST_CASE("default lattice sizes fit the default block size") {
  for (const char* cmd : {"run-sync", "run-async", "run-ct"}) {
    const RunConfig cfg = parse_config(cmd, "");
    CHECK_MESSAGE(cfg.options["n"].get<int>() % cfg.params.M == 0, cmd);
  }
  CHECK_NOTHROW(run_experiment(parse_config("run-async", "", {{"options", {{"events", 1000}}}})));
  CHECK_NOTHROW(run_experiment(parse_config("run-ct", "", {{"options", {{"duration", 1.0}}}})));
}
