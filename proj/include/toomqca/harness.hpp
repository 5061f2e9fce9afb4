#pragma once

// Batch experiment driver: resolved configs, CSV tables and run manifests.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "toomqca/lattice.hpp"

namespace toomqca {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// Every experiment the driver knows, in dispatch order.
const std::vector<std::string>& subcommands();

// Reads M, T_ref, ... over the defaults; unknown keys and violated
// inequalities raise ConfigError naming the problem.
ScheduleParams params_from_json(const Json& j);
Json params_to_json(const ScheduleParams& p);

struct RunConfig {
  std::string command;
  ScheduleParams params;
  std::uint64_t seed = 1;
  Json options = Json::object();  // command options with defaults filled in

  Json to_json() const;
  static RunConfig from_json(const Json& j);
  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.to_json() == b.to_json();
  }
};

// Default options of a subcommand; ConfigError for an unknown one.
Json default_options(const std::string& command);

// Layers: built-in defaults, then the config file (if path is non-empty),
// then `overrides` (flags win). Rejects unknown option names.
RunConfig parse_config(const std::string& command, const std::string& path,
                       const Json& overrides = Json::object());

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

// Round-trip formatting for doubles so CSV bodies are byte-stable.
std::string fmt(double v);
std::string fmt(std::uint64_t v);
std::string fmt(std::int64_t v);
std::string fmt(int v);
std::string fmt(bool v);

struct ExperimentOutput {
  std::vector<std::pair<std::string, CsvTable>> tables;  // file suffix -> table
  std::vector<std::pair<std::string, std::string>> extra_files;  // suffix -> text
  std::vector<std::string> summary;                        // human-readable lines
  Json derived_seeds = Json::object();
  bool invariant_failure = false;  // runs that complete but violate a checked invariant
};

// Runs the experiment for cfg.command. Throws ConfigError or
// InvariantViolation.
ExperimentOutput run_experiment(const RunConfig& cfg);

std::string sha256_hex(const std::string& data);

struct OutputDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  RunConfig config;
  Json derived_seeds = Json::object();
  std::string started;
  std::string finished;
  std::vector<OutputDigest> outputs;

  Json to_json() const;
  static RunManifest from_json(const Json& j);
};

std::string utc_timestamp();

// Writes every output as `<stem><suffix>` and the manifest as
// `<stem>.manifest.json`; returns the manifest.
RunManifest write_outputs(const std::string& stem, const RunConfig& cfg,
                          const ExperimentOutput& out, const std::string& started);

RunManifest read_manifest(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace toomqca
