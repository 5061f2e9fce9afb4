#include "toomqca/harness.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "toomqca/data_layer.hpp"
#include "toomqca/errors.hpp"
#include "toomqca/feasibility.hpp"
#include "toomqca/lifetime.hpp"
#include "toomqca/parallel.hpp"
#include "toomqca/pauli.hpp"
#include "toomqca/renorm.hpp"
#include "toomqca/rng.hpp"
#include "toomqca/schedule.hpp"
#include "toomqca/schedulers.hpp"
#include "toomqca/structure.hpp"

namespace toomqca {

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{
      "run-sync",      "run-async", "run-ct",       "exrec-scan",  "threshold-flow",
      "gadget-check",  "lifetime",  "solve-params", "erosion-test"};
  return names;
}

// ---- parameters ----

namespace {

struct ParamField {
  const char* name;
  int ScheduleParams::*i = nullptr;
  std::int64_t ScheduleParams::*l = nullptr;
};

const std::vector<ParamField>& param_fields() {
  static const std::vector<ParamField> f{
      {"M", &ScheduleParams::M},         {"T_ref", &ScheduleParams::T_ref},
      {"T_code", &ScheduleParams::T_code}, {"T_sim", &ScheduleParams::T_sim},
      {"t_EC", &ScheduleParams::t_EC},   {"t_EC_S", &ScheduleParams::t_EC_S},
      {"t_EC_D", &ScheduleParams::t_EC_D}, {"w", &ScheduleParams::w},
      {"R", &ScheduleParams::R},         {"C_bound", &ScheduleParams::C_bound},
      {"d_D", nullptr, &ScheduleParams::d_D}, {"d_S", nullptr, &ScheduleParams::d_S},
      {"d", nullptr, &ScheduleParams::d}};
  return f;
}

std::int64_t json_int(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

ScheduleParams params_from_json(const Json& j) {
  ScheduleParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("'params' must be an object");
  for (const auto& [key, value] : j.items()) {
    const auto& fields = param_fields();
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const ParamField& f) { return key == f.name; });
    if (it == fields.end()) throw ConfigError("unknown schedule parameter '" + key + "'");
    const std::int64_t v = json_int(value, key);
    if (it->i) {
      p.*(it->i) = static_cast<int>(v);
    } else {
      p.*(it->l) = v;
    }
  }
  p.validate();
  return p;
}

Json params_to_json(const ScheduleParams& p) {
  Json j = Json::object();
  for (const auto& f : param_fields()) {
    if (f.i) {
      j[f.name] = p.*(f.i);
    } else {
      j[f.name] = p.*(f.l);
    }
  }
  return j;
}

Json RunConfig::to_json() const {
  Json j = Json::object();
  j["command"] = command;
  j["seed"] = seed;
  j["params"] = params_to_json(params);
  j["options"] = options;
  return j;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.params = params_from_json(j.at("params"));
  c.options = j.at("options");
  return c;
}

Json default_options(const std::string& command) {
  if (command == "run-sync") {
    return {{"n", 24},          {"steps", 48},       {"p", 0.0},       {"table", "identity"},
            {"data", "classical"}, {"code", "rep3"}, {"rule", "cycle"}, {"gating", true},
            {"stride", 1},      {"structure_noise", true}, {"data_noise", true}};
  }
  if (command == "run-async") {
    return {{"n", 48}, {"events", 100000}, {"p", 0.0}, {"log_events", false}};
  }
  if (command == "run-ct") {
    return {{"n", 48},          {"duration", 20.0}, {"p", 0.0}, {"sample_rate", 1.0},
            {"data_noise", false}, {"burn_in", 0.5},  {"log_events", false}};
  }
  if (command == "exrec-scan") {
    return {{"p", Json::array({0.001, 0.00178, 0.00316, 0.00562, 0.01})},
            {"t_EC_S", 1},
            {"block_M", 4},
            {"block_T_ref", 3},
            {"block_T_code", 1},
            {"blocks", 4},
            {"slices", 8},
            {"min_events", 50},
            {"max_trials", 200000}};
  }
  if (command == "threshold-flow") {
    return {{"A", 100.0}, {"tec", 1}, {"eta0", 0.005}, {"k", 3}};
  }
  if (command == "gadget-check") {
    return {{"gadget", "rep3_ec"}, {"code", "rep3"}, {"t", 1}, {"max_faults", 1}};
  }
  if (command == "lifetime") {
    return {{"L", Json::array({16, 32, 64})},
            {"p", Json::array({0.01})},
            {"trials", 200},
            {"cap", 100000},
            {"rule", "plain"}};
  }
  if (command == "solve-params") {
    return {{"c_sim", 1.0}, {"c_prog", 1.0}, {"c_dim", 1.0}, {"d_D", 12},
            {"T_code", 6},  {"T_ref_min", 18}, {"M_cap", 1 << 20}, {"use_candidate", false}};
  }
  if (command == "erosion-test") {
    return {{"n", 32}, {"trials", 1000}, {"max_norm", 10}};
  }
  throw ConfigError("unknown subcommand '" + command + "'");
}

RunConfig parse_config(const std::string& command, const std::string& path, const Json& overrides) {
  Json merged = Json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
      merged = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed config file '" + path + "': " + e.what());
    }
    if (!merged.is_object()) throw ConfigError("config file must hold a JSON object");
  }
  merged.merge_patch(overrides);
  for (const auto& [key, _] : merged.items()) {
    if (key != "params" && key != "seed" && key != "options" && key != "command") {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  RunConfig cfg;
  cfg.command = command;
  if (merged.contains("command") && merged["command"] != command) {
    throw ConfigError("config is for '" + merged["command"].get<std::string>() + "', not '" +
                      command + "'");
  }
  cfg.params = params_from_json(merged.value("params", Json::object()));
  if (merged.contains("seed")) {
    if (!merged["seed"].is_number_unsigned() && !merged["seed"].is_number_integer()) {
      throw ConfigError("'seed' must be a non-negative integer");
    }
    cfg.seed = merged["seed"].get<std::uint64_t>();
  }
  cfg.options = default_options(command);
  const Json options = merged.value("options", Json::object());
  for (const auto& [key, value] : options.items()) {
    if (!cfg.options.contains(key)) {
      throw ConfigError("unknown option '" + key + "' for " + command);
    }
    cfg.options[key] = value;
  }
  return cfg;
}

// ---- CSV ----

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(std::int64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

// ---- experiments ----

namespace {

template <typename T>
T opt(const RunConfig& c, const char* key) {
  try {
    return c.options.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("option '") + key + "' has the wrong type");
  }
}

template <typename T>
std::vector<T> opt_list(const RunConfig& c, const char* key) {
  const Json& v = c.options.at(key);
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("option '") + key + "' has the wrong type");
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ScheduleTable load_table(const std::string& name) {
  if (name == "identity" || name == "repetition" || name == "stabilizer") {
    return ScheduleTable::builtin(name);
  }
  return ScheduleTable::load(name);
}

CodeSpec load_named_code(const std::string& name) {
  if (name == "rep3") return rep3_code();
  if (name == "steane") return steane_code();
  return load_code(name);
}

GadgetCircuit load_named_gadget(const std::string& name) {
  if (name == "rep3_ec") return rep3_ec_gadget();
  if (name == "rep3_ec_without_correction") return rep3_ec_without_correction();
  if (name == "rep3_idle") return rep3_idle_gadget();
  if (name == "rep3_cnot") return rep3_cnot_gadget();
  return load_gadget(name);
}

std::string describe(const Counterexample& c, int width) {
  std::ostringstream s;
  s << c.condition << " input=" << pauli_string(c.input, width) << " faults=";
  for (std::size_t k = 0; k < c.faults.size(); ++k) {
    if (k) s << ';';
    s << c.faults[k].location << ':' << pauli_string(c.faults[k].pauli, width);
  }
  s << " output=" << pauli_string(c.output, width) << " (" << c.detail << ")";
  std::string out = s.str();
  std::replace(out.begin(), out.end(), ',', ';');
  return out;
}

ExperimentOutput run_sync_cmd(const RunConfig& c, std::uint64_t seed) {
  ExperimentOutput out;
  const int n = opt<int>(c, "n");
  IdealInit init;
  const std::string data = opt<std::string>(c, "data");
  init.data_kind = data_kind_from_string(data == "pauli" ? "pauli" : data);
  std::optional<CodeSpec> code;
  if (init.data_kind == DataKind::PauliFrame) {
    code = load_named_code(opt<std::string>(c, "code"));
    init.block_size = code->block_size;
  }
  LatticeState lat = new_lattice(n, c.params, init);
  SyncOptions so;
  so.cycle.table = load_table(opt<std::string>(c, "table"));
  so.cycle.gating = opt<bool>(c, "gating");
  so.cycle.code = code;
  const std::string rule = opt<std::string>(c, "rule");
  if (rule != "cycle" && rule != "structure") throw ConfigError("rule must be cycle or structure");
  so.cycle.rule = rule == "cycle" ? StepRule::Cycle : StepRule::Structure;
  NoiseParams noise;
  noise.p = opt<double>(c, "p");
  noise.seed = seed;
  noise.structure = opt<bool>(c, "structure_noise");
  noise.data = opt<bool>(c, "data_noise");
  const int stride = std::max(1, opt<int>(c, "stride"));
  const auto steps = opt<std::int64_t>(c, "steps");
  CsvTable t{{"step", "time", "singular", "h_value", "readout", "faults"}, {}};
  CycleRunner runner(so.cycle, lat);
  std::uint64_t faults = 0;
  const CodeSpec* cp = code ? &*code : nullptr;
  auto row = [&](std::int64_t s) {
    const auto sing = singular_sites(lat, lat.global_time());
    t.add({fmt(s), fmt(lat.global_time()), fmt(static_cast<std::uint64_t>(sing.size())),
           fmt(decompose_clusters(sing, n).h_value),
           init.data_kind == DataKind::Opaque ? "-" : to_string(logical_readout(lat, cp)),
           fmt(faults)});
  };
  row(0);
  for (std::int64_t s = 1; s <= steps; ++s) {
    faults += runner.step(lat, noise).events.size();
    if (s % stride == 0 || s == steps) row(s);
  }
  out.summary.push_back("final singular sites: " + t.rows.back()[2]);
  out.tables.push_back({".csv", std::move(t)});
  return out;
}

ExperimentOutput run_async_cmd(const RunConfig& c, std::uint64_t seed) {
  ExperimentOutput out;
  const int n = opt<int>(c, "n");
  LatticeState lat = new_lattice(n, c.params);
  NoiseParams noise;
  noise.p = opt<double>(c, "p");
  noise.seed = seed;
  AsyncOptions ao;
  ao.seed = hash_key(seed, 0xa5);
  ao.log_events = opt<bool>(c, "log_events");
  const auto traj = run_async(lat, opt<std::uint64_t>(c, "events"), noise, ao);
  CsvTable t{{"events", "accepted", "rejected", "max_gap", "min_counter", "faults"}, {}};
  t.add({fmt(opt<std::uint64_t>(c, "events")), fmt(traj.accepted), fmt(traj.rejected),
         fmt(traj.max_gap), fmt(traj.min_counter()),
         fmt(static_cast<std::uint64_t>(traj.faults.events.size()))});
  out.summary.push_back("accepted " + fmt(traj.accepted) + ", max gap " + fmt(traj.max_gap));
  out.tables.push_back({".csv", std::move(t)});
  if (ao.log_events) {
    std::ostringstream log;
    write_event_log(log, traj.events, n);
    out.extra_files.push_back({"_events.log", log.str()});
  }
  return out;
}

ExperimentOutput run_ct_cmd(const RunConfig& c, std::uint64_t seed) {
  ExperimentOutput out;
  const int n = opt<int>(c, "n");
  LatticeState lat = new_lattice(n, c.params);
  CTParams cp;
  cp.p = opt<double>(c, "p");
  cp.duration = opt<double>(c, "duration");
  cp.seed = seed;
  cp.sample_rate = opt<double>(c, "sample_rate");
  cp.data_noise = opt<bool>(c, "data_noise");
  cp.log_events = opt<bool>(c, "log_events");
  const auto traj = run_ct(lat, cp);
  CsvTable dens{{"time", "local_min_fraction"}, {}};
  for (const auto& s : traj.density) dens.add({fmt(s.time), fmt(s.fraction)});
  const Estimate v =
      local_min_density(traj, opt<double>(c, "burn_in") * cp.duration, cp.duration);
  CsvTable sum{{"attempts", "accepted", "noise_events", "accepted_after_noise",
                "effective_fault_rate", "v", "v_lo", "v_hi"},
               {}};
  sum.add({fmt(traj.attempts), fmt(traj.async.accepted), fmt(traj.noise_events),
           fmt(traj.accepted_after_noise), fmt(effective_fault_rate(traj)), fmt(v.value),
           fmt(v.lo), fmt(v.hi)});
  out.summary.push_back("v = " + fmt(v.value) + " [" + fmt(v.lo) + ", " + fmt(v.hi) + "]");
  out.tables.push_back({".csv", std::move(dens)});
  out.tables.push_back({"_summary.csv", std::move(sum)});
  if (cp.log_events) {
    std::ostringstream log;
    write_event_log(log, traj.async.events, n);
    out.extra_files.push_back({"_events.log", log.str()});
  }
  return out;
}

ExperimentOutput exrec_scan_cmd(const RunConfig& c, std::uint64_t seed) {
  ExperimentOutput out;
  LevelNoiseConfig lc;
  lc.params.M = opt<int>(c, "block_M");
  lc.params.T_ref = opt<int>(c, "block_T_ref");
  lc.params.T_code = opt<int>(c, "block_T_code");
  lc.t_EC_S = opt<int>(c, "t_EC_S");
  lc.params.t_EC_S = lc.t_EC_S;
  lc.blocks = opt<int>(c, "blocks");
  lc.slices = opt<int>(c, "slices");
  lc.p_grid = opt_list<double>(c, "p");
  lc.min_events = opt<std::uint64_t>(c, "min_events");
  lc.max_trials = opt<std::uint64_t>(c, "max_trials");
  lc.seed = seed;
  if (lc.params.M < lc.params.T0()) throw ConfigError("block_M must be >= block_T_ref + block_T_code");
  const auto est = estimate_level_noise(lc);
  CsvTable t{{"p", "eta", "P_direct_bad", "ci_lo", "ci_hi", "P_bad", "bad_ci_lo", "bad_ci_hi",
              "exrecs", "direct_bad", "bad", "one_sided", "retained", "derived_rooted_strength"},
             {}};
  for (const auto& pt : est.points) {
    t.add({fmt(pt.p), fmt(pt.eta), fmt(pt.P_direct_bad.value), fmt(pt.P_direct_bad.lo),
           fmt(pt.P_direct_bad.hi), fmt(pt.P_bad.value), fmt(pt.P_bad.lo), fmt(pt.P_bad.hi),
           fmt(pt.exrecs), fmt(pt.direct_bad), fmt(pt.bad), fmt(pt.one_sided), fmt(pt.retained),
           fmt(rooted_strength(est, pt.eta))});
  }
  CsvTable fit{{"t_EC_S", "probability_slope", "probability_slope_se", "strength_slope",
                "strength_slope_se", "A_tilde", "points"},
               {}};
  fit.add({fmt(est.t_EC_S), fmt(est.probability_fit.slope), fmt(est.probability_fit.slope_se),
           fmt(est.strength_slope), fmt(est.strength_slope_se), fmt(est.A_tilde),
           fmt(static_cast<std::uint64_t>(est.probability_fit.points))});
  out.summary.push_back("strength slope " + fmt(est.strength_slope) + " (target " +
                        fmt(est.t_EC_S + 1) + ")");
  out.tables.push_back({".csv", std::move(t)});
  out.tables.push_back({"_fit.csv", std::move(fit)});
  return out;
}

ExperimentOutput threshold_flow_cmd(const RunConfig& c) {
  ExperimentOutput out;
  const double A = opt<double>(c, "A");
  const int tec = opt<int>(c, "tec");
  const double eta0 = opt<double>(c, "eta0");
  const int k = opt<int>(c, "k");
  const RenormFlow f = renorm_flow(eta0, A, tec, k);
  CsvTable t{{"level", "eta", "log10_eta", "log10_closed_form", "eta_th"}, {}};
  const double l0 = std::log10(eta0), lth = std::log10(f.eta_th);
  for (int l = 0; l <= k; ++l) {
    const double closed = lth + std::pow(tec + 1.0, l) * (l0 - lth);
    t.add({fmt(l), fmt(f.eta[l]), fmt(f.log10_eta[l]), fmt(closed), fmt(f.eta_th)});
  }
  out.summary.push_back("eta_th = " + fmt(f.eta_th) + (f.suppressing ? "" : " (no suppression)"));
  out.tables.push_back({".csv", std::move(t)});
  return out;
}

ExperimentOutput gadget_check_cmd(const RunConfig& c) {
  ExperimentOutput out;
  const GadgetCircuit g = load_named_gadget(opt<std::string>(c, "gadget"));
  const CodeSpec code = load_named_code(opt<std::string>(c, "code"));
  const auto rep = check_gadget_conditions(g, code, opt<int>(c, "t"), opt<int>(c, "max_faults"));
  CsvTable t{{"gadget", "condition", "pass", "cases", "partial", "counterexample"}, {}};
  const std::string ce = rep.counterexample ? describe(*rep.counterexample, g.width) : "";
  const bool ce_a1 = rep.counterexample && rep.counterexample->condition == "A1";
  t.add({g.name, "A1", fmt(rep.a1), fmt(rep.a1_cases), fmt(rep.partial), ce_a1 ? ce : ""});
  t.add({g.name, "A2", fmt(rep.a2), fmt(rep.a2_cases), fmt(rep.partial),
         rep.counterexample && !ce_a1 ? ce : ""});
  out.summary.push_back(g.name + (rep.pass() ? ": pass" : ": FAIL " + ce));
  out.tables.push_back({".csv", std::move(t)});
  return out;
}

ExperimentOutput lifetime_cmd(const RunConfig& c, std::uint64_t seed) {
  ExperimentOutput out;
  LifetimeConfig lc;
  lc.L = opt_list<int>(c, "L");
  lc.p = opt_list<double>(c, "p");
  lc.trials = opt<std::uint64_t>(c, "trials");
  lc.cap = opt<std::uint64_t>(c, "cap");
  lc.rule = lifetime_rule_from_string(opt<std::string>(c, "rule"));
  lc.params = c.params;
  lc.seed = seed;
  const auto res = lifetime_experiment(lc);
  CsvTable rows{{"L", "p", "trial", "lifetime", "censored"}, {}};
  for (const auto& r : res.rows) {
    rows.add({fmt(r.L), fmt(r.p), fmt(r.trial), fmt(r.lifetime), fmt(r.censored)});
  }
  CsvTable med{{"L", "p", "trials", "censored", "median", "ci_lo", "ci_hi", "median_censored",
                "k_max"},
               {}};
  for (const auto& s : res.summaries) {
    med.add({fmt(s.L), fmt(s.p), fmt(s.trials), fmt(s.censored), fmt(s.median.median),
             fmt(s.median.lo), fmt(s.median.hi), fmt(s.median.censored), fmt(s.k_max)});
    out.summary.push_back("L=" + fmt(s.L) + " p=" + fmt(s.p) + " median " + fmt(s.median.median) +
                          (s.median.censored ? " (censored)" : ""));
  }
  out.tables.push_back({".csv", std::move(rows)});
  out.tables.push_back({"_medians.csv", std::move(med)});
  return out;
}

ExperimentOutput solve_params_cmd(const RunConfig& c) {
  ExperimentOutput out;
  FeasibilityConstraints fc;
  fc.c_sim = opt<double>(c, "c_sim");
  fc.c_prog = opt<double>(c, "c_prog");
  fc.c_dim = opt<double>(c, "c_dim");
  fc.d_D = opt<std::int64_t>(c, "d_D");
  fc.T_code = opt<int>(c, "T_code");
  fc.M_cap = opt<int>(c, "M_cap");
  std::optional<ScheduleParams> cand;
  if (opt<bool>(c, "use_candidate")) cand = c.params;
  const auto r = solve_params(fc, opt<int>(c, "T_ref_min"), cand);
  CsvTable t{{"feasible", "M", "T_ref", "T_code", "T0", "T_sim", "d_D", "d", "failed", "message"},
             {}};
  std::string failed;
  for (const auto& f : r.failed) failed += (failed.empty() ? "" : ";") + f;
  t.add({fmt(r.feasible), fmt(r.params.M), fmt(r.params.T_ref), fmt(r.params.T_code),
         fmt(r.params.T0()), fmt(r.params.T_sim), fmt(r.params.d_D), fmt(r.d), failed, r.message});
  out.summary.push_back(r.message);
  out.tables.push_back({".csv", std::move(t)});
  return out;
}

struct ErosionTrial {
  Triangle triangle;
  std::vector<Site> sites;
  bool contained = false;
  bool cover_contained = false;
};

ErosionTrial erosion_trial(int n, int max_norm, std::uint64_t seed, std::uint64_t k) {
  KeyedStream rng(seed, 0xe1, k);
  ErosionTrial tr;
  const int norm = static_cast<int>(rng.below(max_norm + 1));
  const int a = static_cast<int>(rng.below(norm + 1));
  const int b = static_cast<int>(rng.below(norm - a + 1));
  tr.triangle = {{static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n))}, a, b, norm - a - b};
  for (int di = -a; di <= norm - a; ++di) {
    for (int dj = -b; di + dj <= tr.triangle.c; ++dj) {
      if (rng.bernoulli(0.5)) tr.sites.push_back({wrap(tr.triangle.anchor.i + di, n),
                                                  wrap(tr.triangle.anchor.j + dj, n)});
    }
  }
  const std::vector<Triangle> one{tr.triangle};
  tr.contained = erosion_check(n, tr.sites, one, norm + 1);
  // The minimal cover of the planar copy must erode as well.
  std::vector<Site> planar;
  auto centered = [n](int v) {
    const int d = wrap(v, n);
    return d > n / 2 ? d - n : d;
  };
  for (const Site& s : tr.sites) {
    planar.push_back({tr.triangle.anchor.i + centered(s.i - tr.triangle.anchor.i),
                      tr.triangle.anchor.j + centered(s.j - tr.triangle.anchor.j)});
  }
  const TriangleCover cover = triangle_norm(planar);
  tr.cover_contained = erosion_check(n, planar, cover.triangles, norm + 1);
  return tr;
}

ExperimentOutput erosion_cmd(const RunConfig& c, std::uint64_t seed) {
  ExperimentOutput out;
  const int n = opt<int>(c, "n");
  const auto trials = opt<std::uint64_t>(c, "trials");
  const int max_norm = opt<int>(c, "max_norm");
  if (2 * (max_norm + 1) >= n) throw ConfigError("max_norm too large for the torus");
  std::vector<ErosionTrial> res(trials);
  parallel_for(trials, [&](std::size_t k) { res[k] = erosion_trial(n, max_norm, seed, k); });
  CsvTable t{{"trial", "anchor_i", "anchor_j", "a", "b", "c", "sites", "contained",
              "cover_contained"},
             {}};
  std::uint64_t passed = 0;
  for (std::size_t k = 0; k < res.size(); ++k) {
    const auto& r = res[k];
    passed += r.contained && r.cover_contained;
    t.add({fmt(static_cast<std::uint64_t>(k)), fmt(r.triangle.anchor.i), fmt(r.triangle.anchor.j),
           fmt(r.triangle.a), fmt(r.triangle.b), fmt(r.triangle.c),
           fmt(static_cast<std::uint64_t>(r.sites.size())), fmt(r.contained),
           fmt(r.cover_contained)});
  }
  out.summary.push_back("erosion contained in " + fmt(passed) + "/" + fmt(trials) + " trials");
  out.invariant_failure = passed != trials;
  out.tables.push_back({".csv", std::move(t)});
  return out;
}

}  // namespace

ExperimentOutput run_experiment(const RunConfig& cfg) {
  const std::uint64_t seed = hash_key(cfg.seed, fnv1a(cfg.command));
  ExperimentOutput out;
  const std::string& c = cfg.command;
  if (c == "run-sync") out = run_sync_cmd(cfg, seed);
  else if (c == "run-async") out = run_async_cmd(cfg, seed);
  else if (c == "run-ct") out = run_ct_cmd(cfg, seed);
  else if (c == "exrec-scan") out = exrec_scan_cmd(cfg, seed);
  else if (c == "threshold-flow") out = threshold_flow_cmd(cfg);
  else if (c == "gadget-check") out = gadget_check_cmd(cfg);
  else if (c == "lifetime") out = lifetime_cmd(cfg, seed);
  else if (c == "solve-params") out = solve_params_cmd(cfg);
  else if (c == "erosion-test") out = erosion_cmd(cfg, seed);
  else throw ConfigError("unknown subcommand '" + c + "'");
  out.derived_seeds["experiment"] = seed;
  return out;
}

// ---- manifest ----

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantViolation("SHA-256 digest failed");
  }
  std::ostringstream s;
  for (unsigned int k = 0; k < len; ++k) {
    s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  }
  return s.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json RunManifest::to_json() const {
  Json j = Json::object();
  j["tool_version"] = tool_version;
  j["config"] = config.to_json();
  j["master_seed"] = config.seed;
  j["derived_seeds"] = derived_seeds;
  j["started"] = started;
  j["finished"] = finished;
  Json outs = Json::array();
  for (const auto& o : outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  j["outputs"] = outs;
  return j;
}

RunManifest RunManifest::from_json(const Json& j) {
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = RunConfig::from_json(j.at("config"));
    m.derived_seeds = j.value("derived_seeds", Json::object());
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    for (const auto& o : j.value("outputs", Json::array())) {
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

RunManifest write_outputs(const std::string& stem, const RunConfig& cfg,
                          const ExperimentOutput& out, const std::string& started) {
  RunManifest m;
  m.config = cfg;
  m.derived_seeds = out.derived_seeds;
  m.started = started;
  auto emit = [&](const std::string& suffix, const std::string& text) {
    const std::string path = stem + suffix;
    write_file(path, text);
    m.outputs.push_back({std::filesystem::path(path).filename().string(), sha256_hex(text)});
  };
  for (const auto& [suffix, table] : out.tables) emit(suffix, table.str());
  for (const auto& [suffix, text] : out.extra_files) emit(suffix, text);
  m.finished = utc_timestamp();
  write_file(stem + ".manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

RunManifest read_manifest(const std::string& path) {
  try {
    return RunManifest::from_json(Json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace toomqca
