#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "guideboot/bayes_glm.h"
#include "guideboot/guidance.h"
#include "guideboot/models.h"
#include "guideboot/rng.h"
#include "guideboot/types.h"

namespace guideboot {

enum class AgentKind {
  kGuideBoot,
  kOnlineGuideBoot,
  kGreedyOnline,
  kBootstrap,
  kObb,
  kGiro,
  kEpsilonGreedy,
  kEpsilonGreedyDecay,
  kGlmUcb,
  kTsBlr,
  kDeepUcb1,
  kDeepTsBeta,
  kMcDropout,
  kUniformRandom,
};

std::string_view agent_name(AgentKind kind);
std::optional<AgentKind> agent_kind_from_name(std::string_view name);
std::span<const AgentKind> all_agent_kinds();

// How single-model agents train: one Adam step per environment step on a
// bootstrap batch from the full history, or a flush of a capacity-c buffer.
enum class UpdateMode { kReplay, kOnline };

struct AgentOptions {
  AgentKind kind = AgentKind::kGuideBoot;
  ModelKind model = ModelKind::kGlm;
  MlpShape mlp_shape;
  std::size_t models = 5;
  // Guidance alpha (GuideBoot), pair-insertion probability (Giro), or bonus
  // coefficient (Deep-UCB1).
  double alpha = 1.0;
  DensityKind density = DensityKind::kHarmonic;
  // Fake-sample augmentation for the GuideBoot family.
  bool augment = true;
  std::size_t bootstrap_size = 512;
  std::size_t buffer_capacity = 512;
  std::size_t minibatches = 4;
  double epsilon = 0.1;
  double dropout_rate = 0.1;
  double shaping = 0.25;
  std::size_t refit_period = 50;
  double ridge = 1.0;
  AdamOptions adam;
  UpdateMode update = UpdateMode::kReplay;
  // Horizon for the decaying epsilon schedule.
  std::size_t horizon = 10000;
};

// Receives every training batch right before its gradient step.
using BatchObserver = std::function<void(std::size_t model, std::span<const Interaction> batch)>;

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string_view name() const = 0;
  // `step` is the 1-based environment step.
  virtual std::size_t select(const CandidateSet& candidates, std::size_t step) = 0;
  virtual void observe(const Interaction& interaction) = 0;
};

// Throws std::invalid_argument for option combinations the agent cannot run
// with (e.g. MC-Dropout without an MLP).
std::unique_ptr<Agent> make_agent(const AgentOptions& options, const FieldLayout& layout,
                                  const RngStream& stream);

// ------------------------------------------------------------ selection rules

std::size_t greedy_select(const RewardModel& model, const CandidateSet& candidates);

std::size_t epsilon_greedy_select(const RewardModel& model, const CandidateSet& candidates,
                                  double epsilon, RngStream& rng);

// start * (1 - t / T), for 0 <= t <= T.
double epsilon_schedule(std::size_t t, std::size_t horizon, double start = 0.1);

// p_hat + alpha * sqrt(2 ln t / count); +infinity for an unseen action.
double deep_ucb1_score(double p_hat, std::size_t t, std::uint64_t count, double alpha);

// Beta parameters (p_hat * count * shaping, (1 - p_hat) * count * shaping),
// each floored at 1; (1, 1) for an unseen action.
std::pair<double, double> deep_ts_beta_params(double p_hat, std::uint64_t count, double shaping);
double deep_ts_beta_sample(double p_hat, std::uint64_t count, double shaping, RngStream& rng);

// One shared last-layer dropout mask for all candidates, then argmax.
std::size_t mc_dropout_select(const Mlp& model, const CandidateSet& candidates, double rate,
                              RngStream& rng);

// Per-action impression and success counts.
struct CountBanditState {
  std::vector<std::uint64_t> impressions;
  std::vector<std::uint64_t> successes;
  std::uint64_t t = 0;

  explicit CountBanditState(std::size_t actions) : impressions(actions, 0), successes(actions, 0) {}
  void record(Code action, int reward);
};

// Greedy online update: shuffle, split into n minibatches, one Adam step
// per minibatch, no fakes.
void greedy_online_flush(RewardModel& model, AdamState& adam, std::span<const Interaction> buffer,
                         std::size_t n, RngStream& rng, const BatchObserver& observer = {});

// ---------------------------------------------------------- ensemble agents

// Experience-replay ensemble: GuideBoot, vanilla Bootstrap, and Giro.
class ReplayEnsembleAgent final : public Agent {
 public:
  ReplayEnsembleAgent(const AgentOptions& options, const FieldLayout& layout,
                      const RngStream& stream);

  std::string_view name() const override { return agent_name(options_.kind); }
  // Picks a model uniformly, scores every candidate with it, returns argmax.
  std::size_t select(const CandidateSet& candidates, std::size_t step) override;
  // Appends to the buffer (plus Giro's pseudo pair), updates counts, trains.
  void observe(const Interaction& interaction) override;

  // Per model: resample b from the buffer, augment with fakes (GuideBoot),
  // one Adam step.
  void train_step();

  void set_batch_observer(BatchObserver observer) { observer_ = std::move(observer); }
  std::size_t last_model() const { return last_model_; }
  const std::vector<Interaction>& buffer() const { return buffer_; }
  const GuidanceState& guidance() const { return guidance_; }
  std::size_t num_models() const { return members_.size(); }
  const RewardModel& model(std::size_t k) const { return *members_.at(k).model; }
  RewardModel& model(std::size_t k) { return *members_.at(k).model; }

 private:
  struct Member {
    std::unique_ptr<RewardModel> model;
    AdamState adam;
    RngStream resample_rng;
    RngStream fake_rng;
  };

  AgentOptions options_;
  FieldLayout layout_;
  std::vector<Member> members_;
  std::vector<Interaction> buffer_;
  GuidanceState guidance_;
  RngStream select_rng_;
  RngStream giro_rng_;
  BatchObserver observer_;
  std::size_t last_model_ = 0;
};

// Streaming ensemble: Online GuideBoot, OBB, and the single-model greedy
// online learner. Trains only when the buffer reaches capacity c.
class OnlineEnsembleAgent final : public Agent {
 public:
  OnlineEnsembleAgent(const AgentOptions& options, const FieldLayout& layout,
                      const RngStream& stream);

  std::string_view name() const override { return agent_name(options_.kind); }
  std::size_t select(const CandidateSet& candidates, std::size_t step) override;
  void observe(const Interaction& interaction) override;

  // Updates counts from the whole buffer, then per model: shuffle-split into n
  // minibatches (Poisson(1)-duplicated first for OBB), augment each with
  // fakes (Online GuideBoot), n sequential Adam steps. Clears the buffer.
  // Throws std::invalid_argument on an empty buffer.
  void flush();

  void set_batch_observer(BatchObserver observer) { observer_ = std::move(observer); }
  std::size_t last_model() const { return last_model_; }
  const std::vector<Interaction>& buffer() const { return buffer_; }
  const GuidanceState& guidance() const { return guidance_; }
  std::size_t num_models() const { return members_.size(); }
  const RewardModel& model(std::size_t k) const { return *members_.at(k).model; }
  RewardModel& model(std::size_t k) { return *members_.at(k).model; }
  std::size_t flushes() const { return flushes_; }

 private:
  struct Member {
    std::unique_ptr<RewardModel> model;
    AdamState adam;
    RngStream shuffle_rng;
    RngStream fake_rng;
    RngStream poisson_rng;
  };

  AgentOptions options_;
  FieldLayout layout_;
  std::vector<Member> members_;
  std::vector<Interaction> buffer_;
  GuidanceState guidance_;
  RngStream select_rng_;
  BatchObserver observer_;
  std::size_t last_model_ = 0;
  std::size_t flushes_ = 0;
};

// ------------------------------------------------------ single-model agents

// epsilon-greedy (fixed or decaying), Deep-UCB1, Deep-TS-Beta and MC-Dropout
// on one reward model, trained in replay or online mode.
class SingleModelAgent final : public Agent {
 public:
  SingleModelAgent(const AgentOptions& options, const FieldLayout& layout,
                   const RngStream& stream);

  std::string_view name() const override { return agent_name(options_.kind); }
  std::size_t select(const CandidateSet& candidates, std::size_t step) override;
  void observe(const Interaction& interaction) override;

  const RewardModel& model() const { return *model_; }
  const CountBanditState& counts() const { return counts_; }

 private:
  void train_on(std::span<const Interaction> batch);

  AgentOptions options_;
  FieldLayout layout_;
  std::unique_ptr<RewardModel> model_;
  AdamState adam_;
  CountBanditState counts_;
  std::vector<Interaction> history_;
  RngStream select_rng_;
  RngStream resample_rng_;
  RngStream shuffle_rng_;
  RngStream dropout_rng_;
};

// GLM-UCB and TS-BLR on a Laplace-approximated Bayesian logistic model over
// the one-hot encoding, refit every `refit_period` observations.
class BayesGlmAgent final : public Agent {
 public:
  BayesGlmAgent(const AgentOptions& options, const FieldLayout& layout, const RngStream& stream);

  std::string_view name() const override { return agent_name(options_.kind); }
  std::size_t select(const CandidateSet& candidates, std::size_t step) override;
  void observe(const Interaction& interaction) override;

  void refit();
  const BayesGlmState& state() const { return state_; }

 private:
  AgentOptions options_;
  FieldLayout layout_;
  BayesGlmState state_;
  std::map<std::vector<Code>, std::pair<double, double>> rows_;
  std::size_t pending_ = 0;
  RngStream select_rng_;
};

class UniformRandomAgent final : public Agent {
 public:
  explicit UniformRandomAgent(const RngStream& stream) : rng_(stream.derive("select")) {}
  std::string_view name() const override { return agent_name(AgentKind::kUniformRandom); }
  std::size_t select(const CandidateSet& candidates, std::size_t) override {
    return rng_.uniform_index(candidates.size());
  }
  void observe(const Interaction&) override {}

 private:
  RngStream rng_;
};

}  // namespace guideboot
