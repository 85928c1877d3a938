#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqprob/report.hpp"

namespace seqprob::scenarios {

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::string section;  // the part of the analysis it reproduces
};

const std::vector<ScenarioInfo>& scenario_catalog();

struct ScenarioConfig {
  std::string scenario;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  bool check = false;
  int threads = 1;
  std::string format = "csv";       // csv | json for tabular outputs
  nlohmann::json params = nlohmann::json::object();
};

// Strict parse: unknown keys rejected (throws std::invalid_argument).
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);

// JSON schema documenting the accepted config keys.
nlohmann::json config_schema();

struct ScenarioResult {
  report::Report report;
  std::vector<std::string> artifacts;  // files written (relative to out_dir)
};

// Runs one scenario, writing manifest.json, report.json and data files into
// cfg.out_dir. Throws std::invalid_argument for unknown scenarios/bad params.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// 64-bit FNV-1a of the canonical config dump (stamped into the manifest).
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace seqprob::scenarios
