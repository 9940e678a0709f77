#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include "guideboot/config.h"
#include "guideboot/harness.h"
#include "guideboot/oracle_suite.h"

namespace fs = std::filesystem;
using namespace guideboot;

namespace {

int run_command(const std::string& config_path, const std::string& seeds,
                const std::string& agents, const std::string& out_dir, unsigned jobs) {
  RunConfig config = parse_config_file(config_path);
  if (!seeds.empty()) config.seeds = parse_seed_list(seeds);
  if (!agents.empty()) {
    config.agents.clear();
    std::stringstream ss(agents);
    std::string name;
    while (std::getline(ss, name, ',')) {
      auto kind = agent_kind_from_name(name);
      if (!kind) throw std::invalid_argument("unknown agent '" + name + "'");
      config.agents.push_back(*kind);
    }
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    config.output.records = fs::path(out_dir) / config.output.records.filename();
    config.output.summary = fs::path(out_dir) / config.output.summary.filename();
  }
  if (jobs > 0) config.jobs = jobs;

  auto records = run_experiment(config, config.jobs);
  auto summary = aggregate(records);
  write_outputs(records, summary, config.output);
  std::cerr << "wrote " << records.size() << " records to " << config.output.records.string()
            << " and " << summary.size() << " summary rows to "
            << config.output.summary.string() << '\n';
  return 0;
}

int summarize_command(const std::string& records_path) {
  auto records = read_records_file(records_path);
  auto summary = aggregate(records);
  write_summary(std::cout, summary);
  return 0;
}

int oracle_check_command(const oracles::SuiteOptions& options) {
  bool all = true;
  for (const auto& check : oracles::run_oracle_checks(options)) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail
              << '\n';
    all = all && check.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GuideBoot contextual bandit experiments"};
  app.require_subcommand(1);

  std::string config_path, seeds, agents, out_dir;
  unsigned jobs = 0;
  auto* run = app.add_subcommand("run", "Run every configured (agent, seed) episode");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "Seed range a..b or comma list (overrides run.seeds)");
  run->add_option("--agents", agents, "Comma-separated agent names (overrides agent.name)");
  run->add_option("--out-dir", out_dir, "Directory for the records and summary files");
  run->add_option("--jobs", jobs, "Worker threads (overrides run.jobs)");

  std::string records_path;
  auto* summarize = app.add_subcommand("summarize", "Aggregate a records file across seeds");
  summarize->add_option("--records", records_path, "Records CSV")
      ->required()
      ->check(CLI::ExistingFile);

  oracles::SuiteOptions suite;
  auto* oracle = app.add_subcommand("oracle-check", "Verify the estimator oracles");
  oracle->add_option("--trials", suite.trials, "Monte-Carlo trials per case");
  oracle->add_option("--seed", suite.seed, "Root seed");
  oracle->add_option("--workers", suite.workers, "Monte-Carlo worker streams");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, seeds, agents, out_dir, jobs);
    if (*summarize) return summarize_command(records_path);
    if (*oracle) return oracle_check_command(suite);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
