// Acceptance suite: one PASS/FAIL line per criterion. Exit 0 when every
// criterion passes or fails only among --known-infeasible, 4 otherwise.

#include <CLI11.hpp>

#include <chrono>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "toomqca/data_layer.hpp"
#include "toomqca/errors.hpp"
#include "toomqca/harness.hpp"
#include "toomqca/lifetime.hpp"
#include "toomqca/parallel.hpp"
#include "toomqca/renorm.hpp"
#include "toomqca/rng.hpp"
#include "toomqca/schedulers.hpp"
#include "toomqca/structure.hpp"

using namespace toomqca;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::filesystem::path g_workdir;
std::vector<std::string> g_manifests;

// Runs an experiment through the driver and keeps its manifest for the
// reproducibility check.
ExperimentOutput run_recorded(const std::string& tag, const std::string& command,
                              const Json& overrides) {
  const RunConfig cfg = parse_config(command, "", overrides);
  const std::string started = utc_timestamp();
  ExperimentOutput out = run_experiment(cfg);
  const std::string stem = (g_workdir / tag).string();
  write_outputs(stem, cfg, out, started);
  g_manifests.push_back(stem + ".manifest.json");
  return out;
}

const CsvTable& table(const ExperimentOutput& out, const std::string& suffix) {
  for (const auto& [s, t] : out.tables) {
    if (s == suffix) return t;
  }
  throw InvariantViolation("missing table " + suffix);
}

std::string num(double v, int digits = 3) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

ScheduleParams params_of(int M, int T_ref, int T_code) {
  ScheduleParams p;
  p.M = M;
  p.T_ref = T_ref;
  p.T_code = T_code;
  return p;
}

// 1 -----------------------------------------------------------------------
Outcome erosion() {
  const auto out = run_recorded("c1_erosion", "erosion-test",
                                {{"seed", 1}, {"options", {{"n", 32}, {"trials", 1000}}}});
  const auto& t = table(out, ".csv");
  std::size_t ok = 0;
  for (const auto& r : t.rows) ok += r[7] == "1" && r[8] == "1";
  return {ok == 1000 && !out.invariant_failure, num(ok, 6) + "/1000 contained"};
}

// 2 -----------------------------------------------------------------------
Outcome stationarity() {
  int checked = 0;
  for (auto [M, T_ref, T_code] : {std::tuple{24, 18, 6}, {9, 6, 2}, {32, 14, 6}}) {
    const auto p = params_of(M, T_ref, T_code);
    LatticeState lat = new_lattice(2 * M, p);
    for (int t = 0; t < p.T0(); ++t) {
      structural_toom_step(lat);
      for (std::size_t k = 0; k < lat.size(); ++k) {
        const Site s = lat.site(k);
        if (lat.structure(s) != ideal_structure(t + 1, s.i, s.j, p)) {
          return {false, "(M,T0)=(" + std::to_string(M) + "," + std::to_string(p.T0()) + ") step " +
                             std::to_string(t)};
        }
      }
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " steps exact over 3 geometries"};
}

// 3 -----------------------------------------------------------------------
Outcome cluster_erasure() {
  const auto p = params_of(16, 12, 4);
  const int n = 16;
  // Offsets from the ideal symbol; two distinct wrong symbols.
  const StructureState wrong[2] = {{3, 5, 7}, {1, 0, 0}};
  const Site corners[3] = {{0, 0}, {7, 6}, {14, 15}};
  int patterns = 0, worst = 0;
  int pow3 = 1;
  for (int k = 0; k < 9; ++k) pow3 *= 3;
  for (const Site corner : corners) {
    for (int code = 1; code < pow3; ++code) {
      LatticeState lat = new_lattice(n, p);
      int c = code;
      for (int b = 0; b < 9; ++b, c /= 3) {
        if (c % 3 == 0) continue;
        const Site s{wrap(corner.i + b / 3, n), wrap(corner.j + b % 3, n)};
        const StructureState id = ideal_structure(0, s.i, s.j, p);
        const StructureState& d = wrong[c % 3 - 1];
        lat.set_structure(s, {wrap(id.tau + d.tau, p.T0()), wrap(id.x + d.x, p.M), wrap(id.y + d.y, p.M)});
      }
      int steps = 0;
      while (!singular_sites(lat, lat.global_time()).empty()) {
        if (++steps > 5) return {false, "pattern " + std::to_string(code) + " survives 5 steps"};
        structural_toom_step(lat);
      }
      worst = std::max(worst, steps);
      ++patterns;
    }
  }
  return {true, std::to_string(patterns) + " patterns erased, worst " + std::to_string(worst) + " steps"};
}

// 4 -----------------------------------------------------------------------
Outcome t_closeness() {
  ClosenessConfig cfg;
  cfg.samples = 10000;
  cfg.seed = 3;
  const auto res = closeness_sweep(cfg);
  std::string detail = std::to_string(res.passed) + "/" + std::to_string(res.samples) +
                       " t-close, worst " + std::to_string(res.worst_output_clusters) + " clusters";
  // Diagnostic at w = 4: T_ref = 24, T0 = 30.
  ClosenessConfig w4;
  w4.params = params_of(30, 24, 6);
  w4.params.w = 4;
  w4.samples = 2000;
  w4.seed = 4;
  const auto r4 = closeness_sweep(w4);
  detail += "; w=4 diagnostic " + std::to_string(r4.passed) + "/" + std::to_string(r4.samples);
  return {res.passed == res.samples, detail};
}

// 5 -----------------------------------------------------------------------
Outcome gadget_conditions() {
  const auto good = run_recorded("c5_gadget", "gadget-check",
                                 {{"options", {{"gadget", "rep3_ec"}}}});
  const auto bad = run_recorded("c5_mutant", "gadget-check",
                                {{"options", {{"gadget", "rep3_ec_without_correction"}}}});
  const auto& g = table(good, ".csv");
  const auto& m = table(bad, ".csv");
  const bool good_pass = g.rows[0][2] == "1" && g.rows[1][2] == "1" && g.rows[0][4] == "0";
  const bool mutant_caught = m.rows[0][2] == "0" && !m.rows[0][5].empty();
  return {good_pass && mutant_caught,
          "rep3_ec A1/A2 " + std::string(good_pass ? "pass" : "FAIL") + " (" + g.rows[0][3] + "+" +
              g.rows[1][3] + " cases); mutant: " + (mutant_caught ? m.rows[0][5] : "not caught")};
}

// 6 -----------------------------------------------------------------------
Outcome exrec_correctness() {
  const CodeSpec code = rep3_code();
  std::uint64_t cases = 0;
  for (const auto& gate : {rep3_idle_gadget(), rep3_cnot_gadget()}) {
    const auto r = check_exrec_correctness(rep3_ec_gadget(), gate, code, 1);
    cases += r.cases;
    if (!r.pass) return {false, gate.name + " fails"};
  }
  return {true, "idle and cnot exRecs, " + std::to_string(cases) + " fault cases"};
}

// 7 -----------------------------------------------------------------------
Outcome sparsity_slope() {
  bool pass = true;
  std::string detail;
  for (int t : {1, 2}) {
    const auto out = run_recorded("c7_exrec_t" + std::to_string(t), "exrec-scan",
                                  {{"seed", 7}, {"options", {{"t_EC_S", t}}}});
    const auto& fit = table(out, "_fit.csv").rows.at(0);
    const double slope = std::stod(fit[3]);
    const int points = std::stoi(fit[6]);
    const bool ok = points >= 2 && std::abs(slope - (t + 1)) <= 0.5;
    pass &= ok;
    if (!detail.empty()) detail += "; ";
    detail += "t=" + std::to_string(t) + " slope " + num(slope) + " +- " + num(std::stod(fit[4]), 2) +
              " over " + std::to_string(points) + " points";
  }
  return {pass, detail};
}

// 8 -----------------------------------------------------------------------
Outcome threshold_flow() {
  run_recorded("c8_flow", "threshold-flow", {{"options", {{"A", 100.0}, {"tec", 1}, {"eta0", 0.005}, {"k", 3}}}});
  KeyedStream rng(88, 0);
  double worst = 0.0;
  for (int d = 0; d < 100; ++d) {
    const double A = std::pow(10.0, 0.5 + 3.5 * rng.uniform());
    const int t = 1 + static_cast<int>(rng.below(3));
    const double eta0 = std::pow(A, -1.0 / t) * (0.05 + 0.9 * rng.uniform());
    const int k = static_cast<int>(rng.below(11));
    worst = std::max(worst, renorm_flow(eta0, A, t, k).max_rel_error);
  }
  const bool th = renorm_flow(0.005, 100.0, 1, 0).eta_th == 0.01 &&
                  std::abs(renorm_flow(1e-4, 1e4, 2, 0).eta_th - 0.01) <= 1e-17;
  // Levels needed as N*D/delta = exp(L) doubles in L; the split over N, D and
  // delta is even. Below L = 16 the flow is still near the threshold.
  auto level_step = [](double from, double to) {
    int worst = 0, prev = -1;
    for (double L = from; L <= to; L *= 2) {
      const auto k = required_levels(std::exp(L / 3), std::exp(L / 3), std::exp(-L / 3), 0.005, 100, 1);
      if (!k) return -1;
      if (prev >= 0) worst = std::max(worst, *k - prev);
      prev = *k;
    }
    return worst;
  };
  const int max_step = level_step(16, 2048);
  const int transient = level_step(1, 16);
  return {worst <= 1e-12 && th && max_step >= 0 && max_step <= 1,
          "max rel error " + num(worst, 2) + ", eta_th exact " + (th ? "yes" : "no") +
              ", max level step per doubling " + std::to_string(max_step) +
              " (L=16..2048; transient L=1..16: " + std::to_string(transient) + ")"};
}

// 9 -----------------------------------------------------------------------
Outcome lifetime_scaling() {
  const auto low = run_recorded("c9_lifetime_p001", "lifetime",
                                {{"seed", 9},
                                 {"options",
                                  {{"L", {16, 32, 64}}, {"p", {0.01}}, {"trials", 200}, {"cap", 100000}}}});
  const auto high = run_recorded("c9_lifetime_p05", "lifetime",
                                 {{"seed", 9},
                                  {"options", {{"L", {16, 32, 64}}, {"p", {0.5}}, {"trials", 200}, {"cap", 100000}}}});
  const auto diag = run_recorded("c9_lifetime_p009", "lifetime",
                                 {{"seed", 9},
                                  {"options", {{"L", {4, 8, 16}}, {"p", {0.09}}, {"trials", 200}, {"cap", 100000}}}});
  auto medians = [](const ExperimentOutput& o) {
    struct M { double med, lo, hi; bool censored; };
    std::vector<M> v;
    for (const auto& r : table(o, "_medians.csv").rows) {
      v.push_back({std::stod(r[4]), std::stod(r[5]), std::stod(r[6]), r[7] == "1"});
    }
    return v;
  };
  const auto lo = medians(low), hi = medians(high), dg = medians(diag);
  bool increasing = true;
  for (std::size_t k = 0; k + 1 < lo.size(); ++k) {
    increasing &= !lo[k].censored && !lo[k + 1].censored && lo[k].hi < lo[k + 1].lo;
  }
  bool flat = true;
  for (std::size_t k = 0; k < hi.size(); ++k) {
    flat &= hi[k].med <= 10 && hi[k].med <= hi[0].med + 2;
  }
  auto show = [](const auto& v) {
    std::string s;
    for (const auto& m : v) s += (s.empty() ? "" : ",") + num(m.med, 6) + (m.censored ? "(cens)" : "");
    return s;
  };
  return {increasing && flat, "p=0.01 medians L=16,32,64: " + show(lo) + "; p=0.5: " + show(hi) +
                                  "; p=0.09 diagnostic L=4,8,16: " + show(dg)};
}

// 10 ----------------------------------------------------------------------
Outcome marching_soldier() {
  const int n = 32;
  const auto p = params_of(32, 24, 6);
  LatticeState init = new_lattice(n, p);
  KeyedStream rng(10, 0);
  for (std::size_t k = 0; k < init.size(); ++k) {
    if (rng.bernoulli(0.05)) {
      init.set_structure(init.site(k), {static_cast<int>(rng.below(p.T0())), static_cast<int>(rng.below(p.M)),
                                        static_cast<int>(rng.below(p.M))});
    }
  }
  AsyncOptions opt;
  opt.record_history = true;
  opt.seed = 1010;
  const auto tr = run_async(init, 1000000, NoiseParams{}, opt);
  const std::uint64_t cmax = tr.min_counter();
  LatticeState sync = init;
  CycleConfig structure_only;
  structure_only.rule = StepRule::Structure;
  CycleRunner runner(structure_only, sync);
  std::uint64_t equal = 0;
  for (std::uint64_t c = 0; c <= cmax; ++c) {
    // The synchronous runner leaves the per-site counters alone.
    LatticeState expect = sync;
    std::fill(expect.counter_plane().begin(), expect.counter_plane().end(), c);
    if (!(tr.slice(c) == expect)) {
      return {false, "slice " + std::to_string(c) + " differs from the synchronous state"};
    }
    ++equal;
    runner.step(sync, NoiseParams{});
  }
  // Forward and reversed row-major sweeps accept every site once per sweep.
  const std::uint32_t N = n * n;
  std::vector<std::uint32_t> fwd, rev;
  for (int sweep = 0; sweep < 200; ++sweep) {
    for (std::uint32_t k = 0; k < N; ++k) {
      fwd.push_back(k);
      rev.push_back(N - 1 - k);
    }
  }
  AsyncOptions a, b;
  a.order = fwd;
  b.order = rev;
  const auto ta = run_async(init, fwd.size(), NoiseParams{}, a);
  const auto tb = run_async(init, rev.size(), NoiseParams{}, b);
  const bool orders = ta.accepted == tb.accepted && ta.state == tb.state;
  return {tr.max_gap <= 1 && orders && cmax > 0,
          "1e6 events, max gap " + std::to_string(tr.max_gap) + ", " + std::to_string(equal) +
              " slices equal sync, orderings agree: " + (orders ? "yes" : "no")};
}

// 11 ----------------------------------------------------------------------
Outcome continuous_time() {
  const auto p = params_of(32, 24, 6);
  std::vector<double> v;
  double ks_p = 0.0;
  for (int L : {64, 128}) {
    CTParams ct;
    ct.duration = 50.0;
    ct.seed = 11 + L;
    ct.sample_rate = 2.0;
    ct.max_interval_samples = L == 64 ? 20000 : 0;
    const auto tr = run_ct(new_lattice(L, p), ct);
    if (L == 64) ks_p = ks_exponential(tr.attempt_intervals, 1.0).p_value;
    v.push_back(local_min_density(tr, 25.0, 50.0).value);
  }
  const bool agree = std::abs(v[0] - v[1]) <= 0.1 * std::max(v[0], v[1]) && std::min(v[0], v[1]) > 0.05;
  std::string detail = "KS p=" + num(ks_p) + ", v(64)=" + num(v[0]) + ", v(128)=" + num(v[1]);
  bool rates = true;
  for (double prob : {1e-3, 1e-2}) {
    CTParams ct;
    ct.p = prob;
    ct.duration = 50.0;
    ct.seed = 1111;
    const auto tr = run_ct(new_lattice(64, p), ct);
    const double vh = local_min_density(tr, 25.0, 50.0).value;
    const double eff = effective_fault_rate(tr);
    const double want = prob / vh;
    rates &= eff > 0 && eff <= 3 * want && eff >= want / 3;
    detail += ", p=" + num(prob) + ": rate " + num(eff) + " vs p/v " + num(want);
  }
  run_recorded("c11_ct", "run-ct", {{"seed", 11}, {"options", {{"n", 48}, {"duration", 20.0}, {"p", 0.01}}}});
  return {ks_p > 0.01 && agree && rates, detail};
}

// 12 ----------------------------------------------------------------------
Outcome gating() {
  const ScheduleParams p;
  const int n = 48;
  const int chunks = 16;
  const std::uint64_t cycles = 100000;
  std::uint64_t counts[2] = {0, 0}, crossings = 0, gated = 0;
  for (int g = 0; g < 2; ++g) {
    std::vector<CycleInstrumentation> inst(chunks);
    parallel_for(chunks, [&](std::size_t c) {
      IdealInit init;
      init.data_kind = DataKind::PauliFrame;
      LatticeState lat = new_lattice(n, p, init);
      CycleConfig cfg;
      cfg.table = ScheduleTable::builtin("stabilizer");
      cfg.code = rep3_code();
      cfg.gating = g == 0;
      CycleRunner runner(cfg, lat);
      NoiseParams noise;
      noise.p = 1e-3;
      noise.data = false;
      noise.seed = hash_key(12, c);
      for (std::uint64_t k = c; k < cycles; k += chunks) runner.run_cycle(lat, noise, &inst[c]);
    });
    for (const auto& i : inst) {
      counts[g] += i.inconsistent_cross_block_executions;
      if (g == 0) {
        crossings += i.cross_block_calls;
        gated += i.gated_calls;
      }
    }
  }
  run_recorded("c12_sync", "run-sync",
               {{"seed", 12},
                {"options", {{"n", 48}, {"steps", 240}, {"p", 0.001}, {"table", "stabilizer"},
                             {"data", "pauli"}, {"data_noise", false}, {"stride", 24}}}});
  return {counts[0] == 0 && counts[1] > 0,
          "1e5 cycles: gated run " + std::to_string(counts[0]) + " inconsistent executions (" +
              std::to_string(gated) + "/" + std::to_string(crossings) + " crossings blocked), ungated " +
              std::to_string(counts[1])};
}

// 13 ----------------------------------------------------------------------
Outcome reproducibility() {
  // Cover the subcommands no other criterion exercises.
  run_recorded("c13_async", "run-async", {{"seed", 13}, {"options", {{"n", 48}, {"events", 200000}, {"p", 0.001}}}});
  run_recorded("c13_solve", "solve-params", Json::object());
  std::size_t same = 0;
  std::string bad;
  for (const auto& path : g_manifests) {
    const RunManifest old = read_manifest(path);
    const ExperimentOutput out = run_experiment(old.config);
    const std::string stem = path.substr(0, path.size() - std::string(".manifest.json").size()) + "_replay";
    const RunManifest now = write_outputs(stem, old.config, out, utc_timestamp());
    bool ok = now.outputs.size() == old.outputs.size();
    for (std::size_t k = 0; ok && k < old.outputs.size(); ++k) ok = now.outputs[k].sha256 == old.outputs[k].sha256;
    if (ok) ++same;
    else bad += " " + std::filesystem::path(path).filename().string();
  }
  return {same == g_manifests.size() && same > 0,
          std::to_string(same) + "/" + std::to_string(g_manifests.size()) + " manifests reproduced" +
              (bad.empty() ? "" : ", mismatched:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> known;
  std::vector<int> only;
  std::string workdir = "acceptance_runs";
  app.add_option("--known-infeasible", known, "Criteria expected to fail");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--workdir", workdir, "Directory for run outputs and manifests");
  CLI11_PARSE(app, argc, argv);
  g_workdir = workdir;
  std::filesystem::create_directories(g_workdir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"erosion inside triangles", erosion},
      {"codeword stationarity", stationarity},
      {"cluster erasure within 5 steps", cluster_erasure},
      {"good exRecs stay t-close", t_closeness},
      {"gadget conditions", gadget_conditions},
      {"exRec decoder commutation", exrec_correctness},
      {"sparsity slope", sparsity_slope},
      {"threshold flow", threshold_flow},
      {"memory lifetime scaling", lifetime_scaling},
      {"marching soldier", marching_soldier},
      {"continuous time", continuous_time},
      {"gating soundness", gating},
      {"reproducibility", reproducibility},
  };
  const std::set<int> known_set(known.begin(), known.end());
  const std::set<int> only_set(only.begin(), only.end());
  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only_set.empty() && !only_set.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << std::setw(2) << id << ": " << (o.pass ? "PASS" : "FAIL") << "  "
              << criteria[k].first << " -- " << o.detail << " [" << std::fixed << std::setprecision(1)
              << secs << " s]" << std::defaultfloat;
    if (!o.pass && known_set.count(id)) std::cout << " (known infeasible)";
    std::cout << std::endl;
    if (!o.pass && !known_set.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 4;
}
