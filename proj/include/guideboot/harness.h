#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "guideboot/agents.h"
#include "guideboot/config.h"
#include "guideboot/envs.h"
#include "guideboot/logged_pool.h"

namespace guideboot {

struct RegretRecord {
  std::uint64_t seed = 0;
  std::string agent;
  std::size_t step = 0;
  Code action = 0;
  int reward = 0;
  double expected_reward = 0.0;
  double best_expected = 0.0;
  double instant_regret = 0.0;
  double cum_regret = 0.0;

  bool operator==(const RegretRecord&) const = default;
};

struct SummaryRow {
  std::string agent;
  std::string metric;  // final_cum_regret | avg_reward
  double mean = 0.0;
  double std = 0.0;
  std::size_t seeds = 0;

  bool operator==(const SummaryRow&) const = default;
};

inline constexpr const char* kRecordsHeader =
    "seed,agent,step,action,reward,expected_reward,best_expected,instant_regret,cum_regret";
inline constexpr const char* kSummaryHeader = "agent,metric,mean,std,seeds";

// Builds the environment for one seed. Environment randomness comes from
// root.derive("env"), so every agent sees the same contexts for a given seed.
std::unique_ptr<Environment> make_environment(const EnvironmentConfig& config,
                                              const RngStream& env_stream,
                                              std::shared_ptr<const LoggedPool> pool = nullptr);

// One full horizon for one agent. Emits a record at every `stride`-th step and
// at the final step. Configuration problems (pool too short, agent options the
// agent cannot run with) throw before step 1.
std::vector<RegretRecord> run_episode(const RunConfig& config, AgentKind agent,
                                      std::uint64_t seed,
                                      std::shared_ptr<const LoggedPool> pool = nullptr);

// Every configured (agent, seed) episode, on up to `jobs` threads. Output is
// ordered by (agent in config order, seed in config order, step).
std::vector<RegretRecord> run_experiment(const RunConfig& config, unsigned jobs = 1);

// Per agent, in order of first appearance: final_cum_regret (cum_regret at
// each seed's last record) and avg_reward (mean reward over each seed's
// records). Sample std with divisor max(1, s - 1).
std::vector<SummaryRow> aggregate(std::span<const RegretRecord> records);

// `%.6g` reals, LF line endings, header row first.
void write_records(std::ostream& out, std::span<const RegretRecord> records);
void write_summary(std::ostream& out, std::span<const SummaryRow> rows);
std::vector<RegretRecord> read_records(std::istream& in);
std::vector<RegretRecord> read_records_file(const std::filesystem::path& path);

// Writes to a temporary sibling and renames it into place; on failure the
// final path is untouched and std::runtime_error is thrown.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

void write_outputs(std::span<const RegretRecord> records, std::span<const SummaryRow> summary,
                   const OutputConfig& output);

}  // namespace guideboot
