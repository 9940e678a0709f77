#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "guideboot/config.h"
#include "guideboot/harness.h"

using namespace guideboot;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  FAIL("expected a ConfigError");
  return 0;
}

RunConfig small_run(std::size_t horizon, std::size_t stride) {
  RunConfig cfg = parse("agent.name = uniform_random\n");
  cfg.environment.horizon = horizon;
  cfg.output.stride = stride;
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("guideboot_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config defaults") {
  RunConfig cfg = parse("agent.name = guideboot\n");
  REQUIRE(cfg.agents == std::vector<AgentKind>{AgentKind::kGuideBoot});
  CHECK(cfg.environment.kind == EnvironmentKind::kGlm);
  CHECK(cfg.environment.horizon == 10000);
  CHECK(cfg.environment.shape.actions == 25);
  CHECK(cfg.seeds == default_seeds());
  CHECK(cfg.seeds.size() == 50);
  CHECK(cfg.output.stride == 100);
  AgentOptions o = cfg.agent_options(AgentKind::kGuideBoot);
  CHECK(o.models == 5);
  CHECK(o.alpha == 1.0);
  CHECK(o.bootstrap_size == 512);
  CHECK(o.buffer_capacity == 512);
  CHECK(o.minibatches == 4);
  CHECK(o.horizon == 10000);
  CHECK(cfg.agent_options(AgentKind::kGiro).alpha == 0.5);
  CHECK(cfg.agent_options(AgentKind::kDeepUcb1).alpha == 0.1);
}

TEST_CASE("config keys, comments and overrides") {
  RunConfig cfg = parse(
      "# benchmark\n"
      "environment.kind = nonlinear   # pairwise table\n"
      "environment.horizon = 300\n"
      "agent.name = guideboot, giro, epsilon_greedy\n"
      "agent.alpha = 2\n"
      "agent.learning_rate = 0.01\n"
      "giro.alpha = 0.25\n"
      "epsilon_greedy.epsilon = 0.05\n"
      "output.stride = 7\n"
      "run.seeds = 3,9\n"
      "run.jobs = 2\n");
  CHECK(cfg.environment.kind == EnvironmentKind::kNonlinear);
  CHECK(cfg.agents.size() == 3);
  CHECK(cfg.agent_options(AgentKind::kGuideBoot).alpha == 2.0);
  CHECK(cfg.agent_options(AgentKind::kGiro).alpha == 0.25);
  CHECK(cfg.agent_options(AgentKind::kEpsilonGreedy).epsilon == 0.05);
  CHECK(cfg.agent_options(AgentKind::kEpsilonGreedy).adam.learning_rate == 0.01);
  CHECK(cfg.agent_options(AgentKind::kGuideBoot).horizon == 300);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 9});
  CHECK(cfg.jobs == 2);
  CHECK(cfg.output.stride == 7);
}

TEST_CASE("config rejects keys that no configured agent uses") {
  CHECK(error_line("agent.name = guideboot\nagent.epsilon = 0.1\n") == 2);
  CHECK(error_line("agent.name = guideboot\nbootstrap.alpha = 2\n") == 2);
  CHECK(error_line("agent.name = glm_ucb\nagent.models = 3\n") == 2);
}

TEST_CASE("config errors carry line numbers") {
  CHECK(error_line("agent.name = guideboot\n\nagent.alpha = 1\nagent.alpha = 2\n") == 4);
  try {
    parse("agent.name = guideboot\nagent.alpha = 1\nagent.alpha = 2\n");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  CHECK(error_line("agent.name = guideboot\nenvironment.colour = red\n") == 2);
  CHECK(error_line("agent.name = linucb\n") == 1);
  CHECK(error_line("agent.name = guideboot\nagent.alpha = -1\n") == 2);
  CHECK(error_line("agent.name = guideboot\nagent.alpha = nan\n") == 2);
  CHECK(error_line("agent.name = epsilon_greedy\nagent.epsilon = 1.5\n") == 2);
  CHECK(error_line("agent.name = mc_dropout\nagent.dropout_rate = 1\n") == 2);
  CHECK(error_line("agent.name = guideboot\nagent.models = 0\n") == 2);
  CHECK(error_line("agent.name = guideboot\nagent.model = tree\n") == 2);
  CHECK(error_line("agent.name = guideboot\noutput.stride = 0\n") == 2);
  CHECK(error_line("agent.name = guideboot\nrun.seeds = 5..2\n") == 2);
  CHECK(error_line("agent.name = guideboot\njust words\n") == 2);
  CHECK(error_line("environment.horizon = 10\n") == 0);
  CHECK(error_line("agent.name = guideboot\nenvironment.kind = logged\n") == 0);
  CHECK(error_line("agent.name = guideboot\nenvironment.pool = x.txt\n") == 2);
  CHECK(error_line(
            "agent.name = guideboot\nenvironment.kind = nonlinear\n"
            "environment.attribute_cardinalities = 5,5,5\n") == 3);
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("0..3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
  CHECK(parse_seed_list("4, 1,9") == std::vector<std::uint64_t>{4, 1, 9});
  CHECK_THROWS_AS(parse_seed_list("3..1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_seed_list("a..b"), std::invalid_argument);
  CHECK_THROWS_AS(parse_seed_list("1,,2"), std::invalid_argument);
}

TEST_CASE("episodes are deterministic and record at the stride") {
  RunConfig cfg = small_run(250, 100);
  auto a = run_episode(cfg, AgentKind::kUniformRandom, 4);
  auto b = run_episode(cfg, AgentKind::kUniformRandom, 4);
  CHECK(a == b);
  REQUIRE(a.size() == 3);
  CHECK(a[0].step == 100);
  CHECK(a[1].step == 200);
  CHECK(a[2].step == 250);
  CHECK(run_episode(cfg, AgentKind::kUniformRandom, 5) != a);

  cfg.environment.horizon = 1;
  auto one = run_episode(cfg, AgentKind::kUniformRandom, 4);
  REQUIRE(one.size() == 1);
  CHECK(one[0].step == 1);
  CHECK(one[0].cum_regret == one[0].instant_regret);
}

TEST_CASE("per-step regret accounting") {
  RunConfig cfg = small_run(400, 1);
  for (AgentKind kind : {AgentKind::kUniformRandom, AgentKind::kEpsilonGreedy, AgentKind::kGuideBoot}) {
    INFO(agent_name(kind));
    cfg.agents = {kind};
    auto records = run_episode(cfg, kind, 11);
    REQUIRE(records.size() == 400);
    double sum = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      CHECK(r.step == i + 1);
      CHECK(r.agent == agent_name(kind));
      CHECK(r.instant_regret >= 0.0);
      CHECK(r.instant_regret == r.best_expected - r.expected_reward);
      CHECK(r.action < 25);
      sum += r.instant_regret;
      CHECK(r.cum_regret == doctest::Approx(sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform-random regret matches the candidate-average oracle") {
  // Rebuilds the environment stream independently and sums, per step, the
  // expected regret of a uniformly random pick and its variance.
  RunConfig cfg = small_run(3000, 3000);
  const std::uint64_t seed = 21;
  auto records = run_episode(cfg, AgentKind::kUniformRandom, seed);
  REQUIRE(records.size() == 1);

  RngStream env_stream = RngStream(seed).derive("env");
  RngStream spec_rng = env_stream.derive("spec");
  auto spec = generate_glm_env(spec_rng, cfg.environment.shape);
  RngStream cand_rng = env_stream.derive("candidates");
  double mean = 0.0, var = 0.0;
  for (std::size_t t = 0; t < 3000; ++t) {
    auto cands = draw_candidates(cfg.environment.shape, cand_rng);
    const double best = best_expected(spec, cands);
    double m = 0.0, m2 = 0.0;
    for (const auto& x : cands.candidates) {
      const double r = best - expected_reward(spec, x);
      m += r;
      m2 += r * r;
    }
    m /= cands.size();
    m2 /= cands.size();
    mean += m;
    var += m2 - m * m;
  }
  CHECK(std::abs(records[0].cum_regret - mean) < 4.0 * std::sqrt(var));
  CHECK(mean > 0.0);
}

TEST_CASE("aggregation") {
  auto rec = [](std::uint64_t seed, const std::string& agent, std::size_t step, int reward,
                double cum) {
    RegretRecord r;
    r.seed = seed;
    r.agent = agent;
    r.step = step;
    r.reward = reward;
    r.cum_regret = cum;
    return r;
  };
  std::vector<RegretRecord> one{rec(0, "a", 1, 1, 0.5), rec(0, "a", 2, 0, 3.0)};
  auto s = aggregate(one);
  REQUIRE(s.size() == 2);
  CHECK(s[0].metric == "final_cum_regret");
  CHECK(s[0].mean == 3.0);
  CHECK(s[0].std == 0.0);
  CHECK(s[0].seeds == 1);
  CHECK(s[1].metric == "avg_reward");
  CHECK(s[1].mean == 0.5);

  std::vector<RegretRecord> two{rec(0, "b", 5, 1, 10.0), rec(1, "b", 5, 0, 14.0),
                                rec(0, "a", 5, 1, 1.0)};
  auto t = aggregate(two);
  REQUIRE(t.size() == 4);
  CHECK(t[0].agent == "b");
  CHECK(t[0].mean == 12.0);
  CHECK(t[0].std == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(t[0].seeds == 2);
  CHECK(t[2].agent == "a");

  std::vector<RegretRecord> shuffled{two[1], two[0], two[2]};
  CHECK(aggregate(shuffled) == t);
  std::vector<RegretRecord> reordered{two[1], two[2], two[0]};
  auto u = aggregate(reordered);
  CHECK(u[0] == t[0]);
  CHECK(u[1] == t[1]);
}

TEST_CASE("CSV headers and round trip") {
  RunConfig cfg = small_run(120, 10);
  auto records = run_episode(cfg, AgentKind::kUniformRandom, 2);
  std::ostringstream out;
  write_records(out, records);
  const std::string text = out.str();
  CHECK(text.rfind(
            "seed,agent,step,action,reward,expected_reward,best_expected,instant_regret,"
            "cum_regret\n",
            0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream in(text);
  auto back = read_records(in);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].step == records[i].step);
    CHECK(back[i].reward == records[i].reward);
    CHECK(back[i].cum_regret == doctest::Approx(records[i].cum_regret).epsilon(1e-5));
  }

  std::ostringstream sum;
  write_summary(sum, aggregate(records));
  CHECK(sum.str().rfind("agent,metric,mean,std,seeds\n", 0) == 0);

  std::istringstream bad_header("seed,agent\n");
  CHECK_THROWS(read_records(bad_header));
  std::istringstream bad_reward(std::string(kRecordsHeader) + "\n0,a,1,0,2,0.5,0.5,0,0\n");
  CHECK_THROWS(read_records(bad_reward));
  std::istringstream short_row(std::string(kRecordsHeader) + "\n0,a,1,0\n");
  CHECK_THROWS(read_records(short_row));
}

TEST_CASE("reals are written with six significant digits") {
  RegretRecord r;
  r.agent = "x";
  r.expected_reward = 1.0 / 3.0;
  r.best_expected = 0.5;
  r.instant_regret = 1.0 / 6.0;
  r.cum_regret = 12345.678;
  std::ostringstream out;
  write_records(out, std::vector<RegretRecord>{r});
  CHECK(out.str().find("0,x,0,0,0,0.333333,0.5,0.166667,12345.7\n") != std::string::npos);
}

TEST_CASE("atomic writes") {
  fs::path dir = scratch_dir("atomic");
  fs::path target = dir / "out.csv";
  write_file_atomic(target, "a,b\n");
  std::ifstream in(target);
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
  CHECK_FALSE(fs::exists(dir / "out.csv.tmp"));

  fs::path missing = dir / "no_such_dir" / "out.csv";
  CHECK_THROWS_AS(write_file_atomic(missing, "x"), std::runtime_error);
  CHECK_FALSE(fs::exists(missing));

  // Target is a directory: the rename fails and the temporary is removed.
  fs::path blocked = dir / "blocked";
  fs::create_directories(blocked / "inner");
  CHECK_THROWS_AS(write_file_atomic(blocked, "x"), std::runtime_error);
  CHECK(fs::is_directory(blocked));
  CHECK_FALSE(fs::exists(dir / "blocked.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("parallel jobs reproduce the sequential run") {
  RunConfig cfg = parse(
      "agent.name = uniform_random, epsilon_greedy, online_guideboot\n"
      "agent.buffer_capacity = 32\n"
      "environment.horizon = 200\n"
      "output.stride = 20\n"
      "run.seeds = 0..3\n");
  auto seq = run_experiment(cfg, 1);
  auto par = run_experiment(cfg, 4);
  CHECK(seq == par);
  REQUIRE(seq.size() == 3 * 4 * 10);
  CHECK(seq.front().agent == "uniform_random");
  CHECK(seq.front().seed == 0);
  CHECK(seq.back().agent == "online_guideboot");
  CHECK(seq.back().seed == 3);
}

TEST_CASE("logged-pool episodes") {
  fs::path dir = scratch_dir("pool");
  fs::path pool_path = dir / "pool.txt";
  {
    std::ofstream out(pool_path);
    out << "# two candidates per request\n";
    for (int t = 0; t < 30; ++t) out << "2;0,1|1,0;0.25|0.75\n";
  }
  RunConfig cfg = parse("agent.name = uniform_random, guideboot\nagent.bootstrap_size = 8\n"
                        "environment.kind = logged\nenvironment.pool = " +
                        pool_path.string() + "\nenvironment.horizon = 30\noutput.stride = 1\n");
  auto records = run_episode(cfg, AgentKind::kUniformRandom, 0);
  REQUIRE(records.size() == 30);
  for (const auto& r : records) {
    CHECK(r.best_expected == 0.75);
    CHECK((r.expected_reward == 0.25 || r.expected_reward == 0.75));
    CHECK(r.instant_regret == 0.75 - r.expected_reward);
  }
  CHECK(run_episode(cfg, AgentKind::kGuideBoot, 0).size() == 30);

  cfg.environment.horizon = 31;
  CHECK_THROWS_AS(run_episode(cfg, AgentKind::kUniformRandom, 0), std::invalid_argument);
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("write_outputs writes both files") {
  fs::path dir = scratch_dir("outputs");
  RunConfig cfg = small_run(50, 10);
  cfg.output.records = dir / "r.csv";
  cfg.output.summary = dir / "s.csv";
  auto records = run_experiment(cfg);
  write_outputs(records, aggregate(records), cfg.output);
  CHECK(read_records_file(cfg.output.records) == [&] {
    std::ostringstream out;
    write_records(out, records);
    std::istringstream in(out.str());
    return read_records(in);
  }());
  CHECK(fs::file_size(cfg.output.summary) > 0);
  fs::remove_all(dir);
}
