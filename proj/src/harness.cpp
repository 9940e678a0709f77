#include "guideboot/harness.h"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace guideboot {
namespace {

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

template <typename T>
T parse_field(const std::string& text, std::size_t line, const char* name) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::runtime_error("records line " + std::to_string(line) + ": malformed " + name +
                             " '" + text + "'");
  }
  return value;
}

FieldLayout logged_layout(const EnvironmentConfig& config, const LoggedPool& pool) {
  if (!config.cardinalities) return pool.inferred_layout();
  FieldLayout layout;
  layout.cardinalities = *config.cardinalities;
  layout.action_field = 0;
  return layout;
}

}  // namespace

std::unique_ptr<Environment> make_environment(const EnvironmentConfig& config,
                                              const RngStream& env_stream,
                                              std::shared_ptr<const LoggedPool> pool) {
  switch (config.kind) {
    case EnvironmentKind::kGlm: {
      RngStream spec_rng = env_stream.derive("spec");
      return std::make_unique<GlmEnvironment>(generate_glm_env(spec_rng, config.shape));
    }
    case EnvironmentKind::kNonlinear: {
      RngStream spec_rng = env_stream.derive("spec");
      return std::make_unique<NonlinearEnvironment>(
          generate_nonlinear_env(spec_rng, config.shape));
    }
    case EnvironmentKind::kLogged: {
      if (!pool) pool = std::make_shared<const LoggedPool>(load_logged_pool(config.pool_path));
      FieldLayout layout = logged_layout(config, *pool);
      return std::make_unique<LoggedPoolEnvironment>(pool, std::move(layout));
    }
  }
  throw std::invalid_argument("unknown environment kind");
}

std::vector<RegretRecord> run_episode(const RunConfig& config, AgentKind agent_kind,
                                      std::uint64_t seed, std::shared_ptr<const LoggedPool> pool) {
  const std::size_t horizon = config.environment.horizon;
  const std::size_t stride = config.output.stride;
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  if (stride == 0) throw std::invalid_argument("stride must be at least 1");

  const RngStream root(seed);
  const RngStream env_stream = root.derive("env");
  auto env = make_environment(config.environment, env_stream, std::move(pool));
  if (auto limit = env->max_steps(); limit && *limit < horizon) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " exceeds the " +
                                std::to_string(*limit) + " steps in the logged pool");
  }
  const FieldLayout layout = env->layout();
  auto agent = make_agent(config.agent_options(agent_kind), layout, root.derive("agent"));
  RngStream candidate_rng = env_stream.derive("candidates");
  RngStream feedback_rng = env_stream.derive("feedback");
  const std::string name(agent->name());

  std::vector<RegretRecord> records;
  records.reserve(horizon / stride + 1);
  double cum_regret = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    EnvStep step = env->next(t, candidate_rng);
    const std::size_t choice = agent->select(step.candidates, t);
    if (choice >= step.candidates.size()) {
      throw std::logic_error("agent chose an out-of-range candidate");
    }
    const double expected = step.expected[choice];
    double best = step.expected[0];
    for (double p : step.expected) best = std::max(best, p);
    const int reward = sample_feedback(expected, feedback_rng);
    const double instant = best - expected;
    cum_regret += instant;

    const FeatureVector& x = step.candidates[choice];
    agent->observe(make_interaction(x, reward, t));

    if (t % stride == 0 || t == horizon) {
      records.push_back(RegretRecord{seed, name, t, x.action(), reward, expected, best, instant,
                                     cum_regret});
    }
  }
  return records;
}

std::vector<RegretRecord> run_experiment(const RunConfig& config, unsigned jobs) {
  if (config.agents.empty()) throw std::invalid_argument("no agents configured");
  if (config.seeds.empty()) throw std::invalid_argument("no seeds configured");

  std::shared_ptr<const LoggedPool> pool;
  if (config.environment.kind == EnvironmentKind::kLogged) {
    pool = std::make_shared<const LoggedPool>(load_logged_pool(config.environment.pool_path));
  }

  struct Job {
    AgentKind agent;
    std::uint64_t seed;
  };
  std::vector<Job> work;
  for (AgentKind a : config.agents) {
    for (std::uint64_t s : config.seeds) work.push_back({a, s});
  }
  std::vector<std::vector<RegretRecord>> results(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        results[i] = run_episode(config, work[i].agent, work[i].seed, pool);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, work.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool_threads;
    for (unsigned i = 0; i < threads; ++i) pool_threads.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<RegretRecord> out;
  for (auto& r : results) {
    out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return out;
}

std::vector<SummaryRow> aggregate(std::span<const RegretRecord> records) {
  struct SeedStats {
    std::size_t last_step = 0;
    double final_regret = 0.0;
    double reward_sum = 0.0;
    std::size_t rows = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, std::map<std::uint64_t, SeedStats>> by_agent;
  for (const auto& r : records) {
    auto [it, inserted] = by_agent.try_emplace(r.agent);
    if (inserted) order.push_back(r.agent);
    SeedStats& s = it->second[r.seed];
    if (s.rows == 0 || r.step >= s.last_step) {
      s.last_step = r.step;
      s.final_regret = r.cum_regret;
    }
    s.reward_sum += r.reward;
    ++s.rows;
  }

  auto summarize = [](const std::string& agent, const char* metric,
                      const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double divisor = static_cast<double>(std::max<std::size_t>(1, values.size() - 1));
    return SummaryRow{agent, metric, mean, std::sqrt(ss / divisor), values.size()};
  };

  std::vector<SummaryRow> rows;
  for (const auto& agent : order) {
    std::vector<double> regrets;
    std::vector<double> rewards;
    for (const auto& [seed, s] : by_agent.at(agent)) {
      regrets.push_back(s.final_regret);
      rewards.push_back(s.reward_sum / static_cast<double>(s.rows));
    }
    rows.push_back(summarize(agent, "final_cum_regret", regrets));
    rows.push_back(summarize(agent, "avg_reward", rewards));
  }
  return rows;
}

void write_records(std::ostream& out, std::span<const RegretRecord> records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.seed << ',' << r.agent << ',' << r.step << ',' << r.action << ',' << r.reward << ','
        << format_real(r.expected_reward) << ',' << format_real(r.best_expected) << ','
        << format_real(r.instant_regret) << ',' << format_real(r.cum_regret) << '\n';
  }
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.agent << ',' << r.metric << ',' << format_real(r.mean) << ',' << format_real(r.std)
        << ',' << r.seeds << '\n';
  }
}

std::vector<RegretRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("records file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsHeader) throw std::runtime_error("records file has an unexpected header");

  std::vector<RegretRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 9) {
      throw std::runtime_error("records line " + std::to_string(line_no) + ": expected 9 fields");
    }
    RegretRecord r;
    r.seed = parse_field<std::uint64_t>(f[0], line_no, "seed");
    r.agent = f[1];
    r.step = parse_field<std::size_t>(f[2], line_no, "step");
    r.action = parse_field<Code>(f[3], line_no, "action");
    r.reward = parse_field<int>(f[4], line_no, "reward");
    if (r.reward != 0 && r.reward != 1) {
      throw std::runtime_error("records line " + std::to_string(line_no) + ": reward not in {0,1}");
    }
    r.expected_reward = parse_field<double>(f[5], line_no, "expected_reward");
    r.best_expected = parse_field<double>(f[6], line_no, "best_expected");
    r.instant_regret = parse_field<double>(f[7], line_no, "instant_regret");
    r.cum_regret = parse_field<double>(f[8], line_no, "cum_regret");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RegretRecord> read_records_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file " + path.string());
  return read_records(in);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + path.string());
  }
}

void write_outputs(std::span<const RegretRecord> records, std::span<const SummaryRow> summary,
                   const OutputConfig& output) {
  std::ostringstream rec;
  write_records(rec, records);
  std::ostringstream sum;
  write_summary(sum, summary);
  write_file_atomic(output.records, rec.str());
  write_file_atomic(output.summary, sum.str());
}

}  // namespace guideboot
