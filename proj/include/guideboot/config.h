#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "guideboot/agents.h"
#include "guideboot/envs.h"

namespace guideboot {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class EnvironmentKind { kGlm, kNonlinear, kLogged };

struct EnvironmentConfig {
  EnvironmentKind kind = EnvironmentKind::kGlm;
  SyntheticShape shape;
  std::size_t horizon = 10000;
  std::filesystem::path pool_path;
  // Logged pools only; inferred from the pool when absent.
  std::optional<std::vector<Code>> cardinalities;
};

// Agent keys as written in a config file; unset fields fall back to the
// agent's defaults.
struct AgentSettings {
  std::optional<ModelKind> model;
  std::optional<std::size_t> models;
  std::optional<double> alpha;
  std::optional<DensityKind> density;
  std::optional<std::size_t> bootstrap_size;
  std::optional<std::size_t> buffer_capacity;
  std::optional<std::size_t> minibatches;
  std::optional<double> epsilon;
  std::optional<double> dropout_rate;
  std::optional<double> shaping;
  std::optional<std::size_t> refit_period;
  std::optional<double> ridge;
  std::optional<double> learning_rate;
  std::optional<UpdateMode> update;
  std::optional<std::size_t> embedding_dim;
  std::optional<std::size_t> hidden;
};

struct OutputConfig {
  std::filesystem::path records = "records.csv";
  std::filesystem::path summary = "summary.csv";
  std::size_t stride = 100;
};

struct RunConfig {
  EnvironmentConfig environment;
  std::vector<AgentKind> agents;
  // agent.<key>, recorded for every agent kind the key applies to.
  std::map<AgentKind, AgentSettings> shared;
  // <agent name>.<key>
  std::map<AgentKind, AgentSettings> overrides;
  OutputConfig output;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 1;

  // Defaults for `kind`, then agent.<key>, then <name>.<key>.
  AgentOptions agent_options(AgentKind kind) const;
};

// Default seed list: 0..49.
std::vector<std::uint64_t> default_seeds();

// Parses "a..b" (inclusive) or a comma-separated list.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

// Line-oriented `dotted.key = value`, '#' starts a comment. Unknown keys,
// duplicate keys, keys that no configured agent uses, and out-of-range values
// raise ConfigError carrying the offending line number.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::filesystem::path& path);

}  // namespace guideboot
