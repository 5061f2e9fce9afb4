// Command-line driver. Every subcommand writes <out>.csv (plus extra tables)
// and <out>.manifest.json. Exit codes: 0 ok, 2 config error, 3 invariant
// violation or irreproducible rerun.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "toomqca/errors.hpp"
#include "toomqca/harness.hpp"

using namespace toomqca;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kInvariant = 3;

// Flag text to JSON shaped like the default value.
Json convert(const std::string& key, const std::string& text, const Json& like) {
  try {
    if (like.is_array()) {
      Json arr = Json::array();
      std::stringstream ss(text);
      std::string item;
      const Json elem = like.empty() ? Json(0.0) : like.front();
      while (std::getline(ss, item, ',')) arr.push_back(convert(key, item, elem));
      return arr;
    }
    std::size_t used = 0;
    if (like.is_boolean()) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw std::invalid_argument("bool");
    }
    if (like.is_number_integer()) {
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument("int");
      return v;
    }
    if (like.is_number()) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("double");
      return v;
    }
    return text;
  } catch (const std::logic_error&) {
    throw ConfigError("bad value '" + text + "' for --" + key);
  }
}

void print_summary(const ExperimentOutput& out, const RunManifest& m) {
  for (const auto& line : out.summary) std::cout << line << '\n';
  for (const auto& o : m.outputs) std::cout << "wrote " << o.path << '\n';
}

int run(const RunConfig& cfg, const std::string& stem) {
  const std::string started = utc_timestamp();
  const ExperimentOutput out = run_experiment(cfg);
  const RunManifest m = write_outputs(stem, cfg, out, started);
  print_summary(out, m);
  return out.invariant_failure ? kInvariant : kOk;
}

int replay(const std::string& manifest_path, std::string stem) {
  const RunManifest old = read_manifest(manifest_path);
  if (stem.empty()) {
    stem = (std::filesystem::path(manifest_path).parent_path() /
            ("replay_" + old.config.command)).string();
  }
  const std::string started = utc_timestamp();
  const ExperimentOutput out = run_experiment(old.config);
  const RunManifest now = write_outputs(stem, old.config, out, started);
  print_summary(out, now);
  bool same = old.outputs.size() == now.outputs.size();
  for (std::size_t k = 0; same && k < old.outputs.size(); ++k) {
    same = old.outputs[k].sha256 == now.outputs[k].sha256;
  }
  std::cout << (same ? "reproduced: byte-identical outputs\n" : "MISMATCH against manifest\n");
  return same ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-correcting QCA simulator"};
  app.require_subcommand(0, 1);
  std::string manifest, replay_out;
  app.add_option("--manifest", manifest, "Re-run the experiment recorded in a manifest");
  app.add_option("--replay-out", replay_out, "Output stem for --manifest re-runs");

  struct Sub {
    CLI::App* app;
    std::string config, out;
    std::uint64_t seed = 0;
    std::vector<std::string> params;
    std::map<std::string, std::string> values;
  };
  std::map<std::string, Sub> subs;
  for (const auto& name : subcommands()) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name);
    s.app->add_option("--config", s.config, "JSON config file");
    s.app->add_option("--out", s.out, "Output stem (default out/<subcommand>)");
    s.app->add_option("--seed", s.seed, "Master seed");
    s.app->add_option("--param", s.params, "Schedule parameter override KEY=VALUE");
    const Json defaults = default_options(name);
    for (const auto& [key, value] : defaults.items()) {
      s.app->add_option("--" + key, s.values[key], "default " + value.dump());
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (!manifest.empty()) return replay(manifest, replay_out);
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      Json overrides = Json::object();
      const Json defaults = default_options(name);
      for (const auto& [key, text] : s.values) {
        if (s.app->count("--" + key) == 0) continue;
        overrides["options"][key] = convert(key, text, defaults[key]);
      }
      for (const auto& kv : s.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects KEY=VALUE, got '" + kv + "'");
        overrides["params"][kv.substr(0, eq)] = convert(kv.substr(0, eq), kv.substr(eq + 1), 0);
      }
      if (s.app->count("--seed")) overrides["seed"] = s.seed;
      const RunConfig cfg = parse_config(name, s.config, overrides);
      return run(cfg, s.out.empty() ? "out/" + name : s.out);
    }
    std::cerr << app.help();
    return kConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const UnsupportedGate& e) {
    std::cerr << "unsupported gate: " << e.what() << '\n';
    return kConfig;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  }
}
