#include "guideboot/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>
#include <string_view>

namespace guideboot {
namespace {

using AgentSet = std::set<AgentKind>;

const AgentSet kReplayEnsembles{AgentKind::kGuideBoot, AgentKind::kBootstrap, AgentKind::kGiro};
const AgentSet kOnlineEnsembles{AgentKind::kOnlineGuideBoot, AgentKind::kObb,
                                AgentKind::kGreedyOnline};
const AgentSet kSingleModel{AgentKind::kEpsilonGreedy, AgentKind::kEpsilonGreedyDecay,
                            AgentKind::kDeepUcb1, AgentKind::kDeepTsBeta, AgentKind::kMcDropout};

AgentSet join(std::initializer_list<AgentSet> sets) {
  AgentSet out;
  for (const auto& s : sets) out.insert(s.begin(), s.end());
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::size_t to_size(const std::string& v, std::size_t line, std::size_t min_value = 0) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(line, "expected a nonnegative integer, got '" + v + "'");
  }
  if (out < min_value) {
    throw ConfigError(line, "value " + v + " must be at least " + std::to_string(min_value));
  }
  return out;
}

double to_real(const std::string& v, std::size_t line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    throw ConfigError(line, "expected a real number, got '" + v + "'");
  }
  return out;
}

double in_range(double x, double lo, double hi, bool hi_open, std::size_t line, const char* what) {
  if (x < lo || x > hi || (hi_open && x == hi)) {
    std::ostringstream msg;
    msg << what << " must be in [" << lo << ", " << hi << (hi_open ? ")" : "]");
    throw ConfigError(line, msg.str());
  }
  return x;
}

double positive(double x, std::size_t line, const char* what) {
  if (!(x > 0.0)) throw ConfigError(line, std::string(what) + " must be positive");
  return x;
}

std::vector<Code> to_codes(const std::string& v, std::size_t line) {
  std::vector<Code> out;
  for (const auto& item : split_list(v)) {
    out.push_back(static_cast<Code>(to_size(item, line, 1)));
  }
  if (out.empty()) throw ConfigError(line, "expected a comma-separated list of cardinalities");
  return out;
}

struct AgentKey {
  AgentSet applies_to;
  std::function<void(AgentSettings&, const std::string&, std::size_t)> set;
};

const std::map<std::string, AgentKey, std::less<>>& agent_keys() {
  static const std::map<std::string, AgentKey, std::less<>> keys = [] {
    const AgentSet model_based = join({kReplayEnsembles, kOnlineEnsembles, kSingleModel});
    std::map<std::string, AgentKey, std::less<>> k;
    k["model"] = {model_based, [](AgentSettings& s, const std::string& v, std::size_t line) {
                    if (v == "glm") s.model = ModelKind::kGlm;
                    else if (v == "mlp") s.model = ModelKind::kMlp;
                    else throw ConfigError(line, "model must be glm or mlp");
                  }};
    k["models"] = {join({kReplayEnsembles, {AgentKind::kOnlineGuideBoot, AgentKind::kObb}}),
                   [](AgentSettings& s, const std::string& v, std::size_t line) {
                     s.models = to_size(v, line, 1);
                   }};
    k["alpha"] = {{AgentKind::kGuideBoot, AgentKind::kOnlineGuideBoot, AgentKind::kGiro,
                   AgentKind::kDeepUcb1},
                  [](AgentSettings& s, const std::string& v, std::size_t line) {
                    s.alpha = positive(to_real(v, line), line, "alpha");
                  }};
    k["density"] = {{AgentKind::kGuideBoot, AgentKind::kOnlineGuideBoot},
                    [](AgentSettings& s, const std::string& v, std::size_t line) {
                      if (v == "harmonic") s.density = DensityKind::kHarmonic;
                      else if (v == "action_count") s.density = DensityKind::kActionCount;
                      else throw ConfigError(line, "density must be harmonic or action_count");
                    }};
    k["bootstrap_size"] = {join({kReplayEnsembles, kSingleModel}),
                           [](AgentSettings& s, const std::string& v, std::size_t line) {
                             s.bootstrap_size = to_size(v, line, 1);
                           }};
    k["buffer_capacity"] = {join({kOnlineEnsembles, kSingleModel}),
                            [](AgentSettings& s, const std::string& v, std::size_t line) {
                              s.buffer_capacity = to_size(v, line, 1);
                            }};
    k["minibatches"] = {join({kOnlineEnsembles, kSingleModel}),
                        [](AgentSettings& s, const std::string& v, std::size_t line) {
                          s.minibatches = to_size(v, line, 1);
                        }};
    k["epsilon"] = {{AgentKind::kEpsilonGreedy, AgentKind::kEpsilonGreedyDecay},
                    [](AgentSettings& s, const std::string& v, std::size_t line) {
                      s.epsilon = in_range(to_real(v, line), 0.0, 1.0, false, line, "epsilon");
                    }};
    k["dropout_rate"] = {{AgentKind::kMcDropout},
                         [](AgentSettings& s, const std::string& v, std::size_t line) {
                           s.dropout_rate =
                               in_range(to_real(v, line), 0.0, 1.0, true, line, "dropout_rate");
                         }};
    k["shaping"] = {{AgentKind::kDeepTsBeta},
                    [](AgentSettings& s, const std::string& v, std::size_t line) {
                      s.shaping = positive(to_real(v, line), line, "shaping");
                    }};
    k["refit_period"] = {{AgentKind::kGlmUcb, AgentKind::kTsBlr},
                         [](AgentSettings& s, const std::string& v, std::size_t line) {
                           s.refit_period = to_size(v, line, 1);
                         }};
    k["ridge"] = {{AgentKind::kGlmUcb, AgentKind::kTsBlr},
                  [](AgentSettings& s, const std::string& v, std::size_t line) {
                    s.ridge = positive(to_real(v, line), line, "ridge");
                  }};
    k["learning_rate"] = {model_based, [](AgentSettings& s, const std::string& v, std::size_t line) {
                            s.learning_rate = positive(to_real(v, line), line, "learning_rate");
                          }};
    k["update"] = {kSingleModel, [](AgentSettings& s, const std::string& v, std::size_t line) {
                     if (v == "replay") s.update = UpdateMode::kReplay;
                     else if (v == "online") s.update = UpdateMode::kOnline;
                     else throw ConfigError(line, "update must be replay or online");
                   }};
    k["embedding_dim"] = {model_based, [](AgentSettings& s, const std::string& v, std::size_t line) {
                            s.embedding_dim = to_size(v, line, 1);
                          }};
    k["hidden"] = {model_based, [](AgentSettings& s, const std::string& v, std::size_t line) {
                     s.hidden = to_size(v, line, 1);
                   }};
    return k;
  }();
  return keys;
}

template <typename T>
void apply(std::optional<T> from, T& to) {
  if (from) to = *from;
}

void apply_settings(const AgentSettings& s, AgentOptions& o) {
  apply(s.model, o.model);
  apply(s.models, o.models);
  apply(s.alpha, o.alpha);
  apply(s.density, o.density);
  apply(s.bootstrap_size, o.bootstrap_size);
  apply(s.buffer_capacity, o.buffer_capacity);
  apply(s.minibatches, o.minibatches);
  apply(s.epsilon, o.epsilon);
  apply(s.dropout_rate, o.dropout_rate);
  apply(s.shaping, o.shaping);
  apply(s.refit_period, o.refit_period);
  apply(s.ridge, o.ridge);
  apply(s.learning_rate, o.adam.learning_rate);
  apply(s.update, o.update);
  apply(s.embedding_dim, o.mlp_shape.embedding_dim);
  apply(s.hidden, o.mlp_shape.hidden);
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& what)
    : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_(line) {}

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> seeds(50);
  for (std::uint64_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
  return seeds;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  auto number = [](const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("malformed seed '" + s + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    std::uint64_t lo = number(trim(text.substr(0, dots)));
    std::uint64_t hi = number(trim(text.substr(dots + 2)));
    if (hi < lo) throw std::invalid_argument("seed range '" + text + "' is empty");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  } else {
    for (const auto& item : split_list(text)) seeds.push_back(number(item));
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

AgentOptions RunConfig::agent_options(AgentKind kind) const {
  AgentOptions o;
  o.kind = kind;
  switch (kind) {
    case AgentKind::kGiro:
      o.alpha = 0.5;
      break;
    case AgentKind::kDeepUcb1:
      o.alpha = 0.1;
      break;
    default:
      o.alpha = 1.0;
  }
  o.horizon = environment.horizon;
  if (auto it = shared.find(kind); it != shared.end()) apply_settings(it->second, o);
  if (auto it = overrides.find(kind); it != overrides.end()) apply_settings(it->second, o);
  return o;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  cfg.seeds = default_seeds();

  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry> entries;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(line_no, "expected 'key = value'");
    if (auto it = entries.find(key); it != entries.end()) {
      throw ConfigError(line_no, "duplicate key '" + key + "' (first set on line " +
                                     std::to_string(it->second.line) + ", again on line " +
                                     std::to_string(line_no) + ")");
    }
    entries.emplace(key, Entry{value, line_no});
  }

  auto name_it = entries.find("agent.name");
  if (name_it == entries.end()) throw ConfigError(0, "missing required key 'agent.name'");
  for (const auto& name : split_list(name_it->second.value)) {
    auto kind = agent_kind_from_name(name);
    if (!kind) throw ConfigError(name_it->second.line, "unknown agent '" + name + "'");
    if (std::find(cfg.agents.begin(), cfg.agents.end(), *kind) == cfg.agents.end()) {
      cfg.agents.push_back(*kind);
    }
  }

  std::optional<std::size_t> pool_line;
  std::optional<std::size_t> cardinalities_line;
  for (const auto& [key, entry] : entries) {
    const std::string& v = entry.value;
    const std::size_t line = entry.line;
    if (key == "agent.name") continue;

    if (key == "environment.kind") {
      if (v == "glm") cfg.environment.kind = EnvironmentKind::kGlm;
      else if (v == "nonlinear") cfg.environment.kind = EnvironmentKind::kNonlinear;
      else if (v == "logged") cfg.environment.kind = EnvironmentKind::kLogged;
      else throw ConfigError(line, "environment.kind must be glm, nonlinear or logged");
    } else if (key == "environment.actions") {
      cfg.environment.shape.actions = static_cast<Code>(to_size(v, line, 1));
    } else if (key == "environment.attribute_cardinalities") {
      cfg.environment.shape.attribute_cardinalities = to_codes(v, line);
    } else if (key == "environment.horizon") {
      cfg.environment.horizon = to_size(v, line, 1);
    } else if (key == "environment.pool") {
      cfg.environment.pool_path = v;
      pool_line = line;
    } else if (key == "environment.cardinalities") {
      cfg.environment.cardinalities = to_codes(v, line);
      cardinalities_line = line;
    } else if (key == "output.records") {
      cfg.output.records = v;
    } else if (key == "output.summary") {
      cfg.output.summary = v;
    } else if (key == "output.stride") {
      cfg.output.stride = to_size(v, line, 1);
    } else if (key == "run.seeds") {
      try {
        cfg.seeds = parse_seed_list(v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line, e.what());
      }
    } else if (key == "run.jobs") {
      cfg.jobs = static_cast<unsigned>(to_size(v, line, 1));
    } else {
      // agent.<key> or <agent name>.<key>
      auto dot = key.find('.');
      std::string scope = dot == std::string::npos ? key : key.substr(0, dot);
      std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
      auto spec = agent_keys().find(field);
      if (scope == "agent") {
        if (spec == agent_keys().end()) throw ConfigError(line, "unknown key '" + key + "'");
        bool used = std::any_of(cfg.agents.begin(), cfg.agents.end(), [&](AgentKind k) {
          return spec->second.applies_to.contains(k);
        });
        if (!used) {
          throw ConfigError(line, "key '" + key + "' does not apply to the configured agent(s)");
        }
        for (AgentKind k : spec->second.applies_to) spec->second.set(cfg.shared[k], v, line);
      } else if (auto kind = agent_kind_from_name(scope)) {
        if (spec == agent_keys().end()) throw ConfigError(line, "unknown key '" + key + "'");
        if (!spec->second.applies_to.contains(*kind)) {
          throw ConfigError(line, "key '" + field + "' does not apply to agent '" + scope + "'");
        }
        spec->second.set(cfg.overrides[*kind], v, line);
      } else {
        throw ConfigError(line, "unknown key '" + key + "'");
      }
    }
  }

  if (cfg.environment.kind == EnvironmentKind::kLogged) {
    if (cfg.environment.pool_path.empty()) {
      throw ConfigError(0, "environment.kind = logged requires environment.pool");
    }
  } else {
    if (pool_line) throw ConfigError(*pool_line, "environment.pool applies only to logged pools");
    if (cardinalities_line) {
      throw ConfigError(*cardinalities_line,
                        "environment.cardinalities applies only to logged pools");
    }
    if (cfg.environment.kind == EnvironmentKind::kNonlinear &&
        cfg.environment.shape.attribute_cardinalities.size() != 2) {
      throw ConfigError(entries.count("environment.attribute_cardinalities")
                            ? entries.at("environment.attribute_cardinalities").line
                            : 0,
                        "the nonlinear environment needs exactly two attribute fields");
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

}  // namespace guideboot
