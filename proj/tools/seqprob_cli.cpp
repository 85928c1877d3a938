#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seqprob/scenarios.hpp"

namespace {

void print_catalog(bool as_json) {
  const auto& catalog = seqprob::scenarios::scenario_catalog();
  if (as_json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : catalog)
      arr.push_back({{"name", s.name},
                     {"description", s.description},
                     {"section", s.section}});
    std::cout << arr.dump(1) << "\n";
    return;
  }
  std::cout << "available scenarios:\n";
  for (const auto& s : catalog)
    std::cout << "  " << s.name << "  -  " << s.description << "  [" << s.section
              << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqprob: sequential-measurement probability laboratory"};
  app.require_subcommand(0, 1);

  auto* list_cmd = app.add_subcommand("list", "list the available scenarios");
  bool list_json = false;
  list_cmd->add_flag("--json", list_json, "emit the catalog as JSON");

  auto* schema_cmd =
      app.add_subcommand("schema", "print the JSON schema for config files");

  auto* run_cmd = app.add_subcommand("run", "run one scenario");
  std::string scenario, config_file, out_dir = ".", format;
  std::uint64_t seed = 0;
  bool seed_set = false, check = false;
  int threads = 0;
  run_cmd->add_option("--scenario", scenario, "scenario name");
  run_cmd->add_option("--config", config_file, "JSON config file");
  run_cmd->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "RNG seed");
  run_cmd->add_flag("--check", check, "fail (exit 1) when any assertion fails");
  auto* threads_opt = run_cmd->add_option("--threads", threads, "worker threads");
  run_cmd->add_option("--format", format, "table format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  seed_set = seed_opt->count() > 0;

  if (list_cmd->parsed()) {
    print_catalog(list_json);
    return 0;
  }
  if (schema_cmd->parsed()) {
    std::cout << seqprob::scenarios::config_schema().dump(1) << "\n";
    return 0;
  }
  if (!run_cmd->parsed()) {
    print_catalog(false);
    std::cout << "\nusage: seqprob run --scenario NAME [--config FILE] [--out DIR]"
                 " [--seed N] [--check] [--threads N] [--format csv|json]\n";
    return 0;
  }

  seqprob::scenarios::ScenarioConfig cfg;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw std::invalid_argument("cannot open config file " + config_file);
      nlohmann::json j;
      in >> j;
      cfg = seqprob::scenarios::config_from_json(j);
    }
    if (!scenario.empty()) cfg.scenario = scenario;
    if (seed_set) cfg.seed = seed;
    if (run_cmd->count("--out")) cfg.out_dir = out_dir;
    if (check) cfg.check = true;
    if (!format.empty()) cfg.format = format;
    if (threads_opt->count() > 0) {
      cfg.threads = threads;
    } else if (const char* env = std::getenv("SEQPROB_THREADS")) {
      cfg.threads = std::max(1, std::atoi(env));
    }
    if (cfg.scenario.empty())
      throw std::invalid_argument("no scenario given (see: seqprob list)");

    const auto result = seqprob::scenarios::run_scenario(cfg);
    for (const auto& rec : result.report.records())
      std::cout << (rec.pass ? "[ok]   " : "[FAIL] ") << cfg.scenario << "/"
                << rec.name << " = " << rec.value << "\n";
    if (cfg.check && !result.report.all_pass()) return 1;
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "usage: seqprob run --scenario NAME [--config FILE] [--out DIR]"
                 " [--seed N] [--check] [--threads N] [--format csv|json]\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
