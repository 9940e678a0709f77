#include "guideboot/agents.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "guideboot/envs.h"

namespace guideboot {
namespace {

struct NamedKind {
  AgentKind kind;
  std::string_view name;
};

constexpr std::array<NamedKind, 14> kAgentNames{{
    {AgentKind::kGuideBoot, "guideboot"},
    {AgentKind::kOnlineGuideBoot, "online_guideboot"},
    {AgentKind::kGreedyOnline, "greedy_online"},
    {AgentKind::kBootstrap, "bootstrap"},
    {AgentKind::kObb, "obb"},
    {AgentKind::kGiro, "giro"},
    {AgentKind::kEpsilonGreedy, "epsilon_greedy"},
    {AgentKind::kEpsilonGreedyDecay, "epsilon_greedy_decay"},
    {AgentKind::kGlmUcb, "glm_ucb"},
    {AgentKind::kTsBlr, "ts_blr"},
    {AgentKind::kDeepUcb1, "deep_ucb1"},
    {AgentKind::kDeepTsBeta, "deep_ts_beta"},
    {AgentKind::kMcDropout, "mc_dropout"},
    {AgentKind::kUniformRandom, "uniform_random"},
}};

constexpr std::array<AgentKind, 14> kAllKinds = [] {
  std::array<AgentKind, 14> kinds{};
  for (std::size_t i = 0; i < kAgentNames.size(); ++i) kinds[i] = kAgentNames[i].kind;
  return kinds;
}();

std::vector<double> score_all(const RewardModel& model, const CandidateSet& candidates) {
  std::vector<double> scores(candidates.size());
  model.logits(candidates.candidates, scores);
  return scores;
}

// Guidance alpha must be positive even for agents that never consult it.
double guidance_alpha(const AgentOptions& o) {
  switch (o.kind) {
    case AgentKind::kGuideBoot:
    case AgentKind::kOnlineGuideBoot:
      return o.alpha;
    default:
      return 1.0;
  }
}

void require_positive(std::size_t value, const char* what) {
  if (value == 0) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

std::string_view agent_name(AgentKind kind) {
  for (const auto& entry : kAgentNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

std::optional<AgentKind> agent_kind_from_name(std::string_view name) {
  for (const auto& entry : kAgentNames) {
    if (entry.name == name) return entry.kind;
  }
  return std::nullopt;
}

std::span<const AgentKind> all_agent_kinds() { return kAllKinds; }

// ------------------------------------------------------------ selection rules

std::size_t greedy_select(const RewardModel& model, const CandidateSet& candidates) {
  return argmax_tiebreak(score_all(model, candidates));
}

std::size_t epsilon_greedy_select(const RewardModel& model, const CandidateSet& candidates,
                                  double epsilon, RngStream& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must be in [0, 1]");
  }
  if (rng.bernoulli(epsilon)) return rng.uniform_index(candidates.size());
  return greedy_select(model, candidates);
}

double epsilon_schedule(std::size_t t, std::size_t horizon, double start) {
  if (horizon == 0 || t > horizon) throw std::invalid_argument("epsilon_schedule needs 0 <= t <= T");
  return start * (1.0 - static_cast<double>(t) / static_cast<double>(horizon));
}

double deep_ucb1_score(double p_hat, std::size_t t, std::uint64_t count, double alpha) {
  if (count == 0) return std::numeric_limits<double>::infinity();
  if (t == 0) throw std::invalid_argument("deep_ucb1_score needs t >= 1");
  return p_hat +
         alpha * std::sqrt(2.0 * std::log(static_cast<double>(t)) / static_cast<double>(count));
}

std::pair<double, double> deep_ts_beta_params(double p_hat, std::uint64_t count, double shaping) {
  if (count == 0) return {1.0, 1.0};
  const double n = static_cast<double>(count);
  return {std::max(1.0, p_hat * n * shaping), std::max(1.0, (1.0 - p_hat) * n * shaping)};
}

double deep_ts_beta_sample(double p_hat, std::uint64_t count, double shaping, RngStream& rng) {
  auto [a, b] = deep_ts_beta_params(p_hat, count, shaping);
  return rng.beta(a, b);
}

std::size_t mc_dropout_select(const Mlp& model, const CandidateSet& candidates, double rate,
                              RngStream& rng) {
  std::vector<double> mask = model.draw_dropout_mask(rate, rng);
  std::vector<double> scores(candidates.size());
  model.logits_masked(candidates.candidates, mask, scores);
  return argmax_tiebreak(scores);
}

void CountBanditState::record(Code action, int reward) {
  auto a = static_cast<std::size_t>(action);
  ++impressions.at(a);
  if (reward) ++successes.at(a);
  ++t;
}

void greedy_online_flush(RewardModel& model, AdamState& adam, std::span<const Interaction> buffer,
                         std::size_t n, RngStream& rng, const BatchObserver& observer) {
  if (buffer.empty()) throw std::invalid_argument("flush of an empty buffer");
  for (const auto& batch : shuffle_split(buffer, std::min(n, buffer.size()), rng)) {
    if (observer) observer(0, batch);
    adam_step(model, model.grad_logloss(batch), adam);
  }
}

// ------------------------------------------------------ ReplayEnsembleAgent

ReplayEnsembleAgent::ReplayEnsembleAgent(const AgentOptions& options, const FieldLayout& layout,
                                         const RngStream& stream)
    : options_(options),
      layout_(layout),
      guidance_(layout, guidance_alpha(options), options.density),
      select_rng_(stream.derive("select")),
      giro_rng_(stream.derive("giro")) {
  require_positive(options.models, "model count");
  require_positive(options.bootstrap_size, "bootstrap size");
  if (options.kind == AgentKind::kGiro && !(options.alpha >= 0.0 && options.alpha <= 1.0)) {
    throw std::invalid_argument("Giro pair probability must be in [0, 1]");
  }
  for (std::size_t k = 0; k < options.models; ++k) {
    RngStream model_rng = stream.derive("model-" + std::to_string(k));
    auto model = init_model(options.model, layout, model_rng, options.mlp_shape);
    AdamState adam = AdamState::for_model(*model, options.adam);
    members_.push_back(Member{std::move(model), std::move(adam), model_rng.derive("resample"),
                              model_rng.derive("fakes")});
  }
}

std::size_t ReplayEnsembleAgent::select(const CandidateSet& candidates, std::size_t) {
  last_model_ = select_rng_.uniform_index(members_.size());
  return greedy_select(*members_[last_model_].model, candidates);
}

void ReplayEnsembleAgent::observe(const Interaction& interaction) {
  buffer_.push_back(interaction);
  if (options_.kind == AgentKind::kGiro && giro_rng_.bernoulli(options_.alpha)) {
    buffer_.push_back(Interaction{interaction.features, 1, interaction.step});
    buffer_.push_back(Interaction{interaction.features, 0, interaction.step});
  }
  guidance_.update_counts(interaction.features);
  train_step();
}

void ReplayEnsembleAgent::train_step() {
  if (buffer_.empty()) throw std::invalid_argument("train_step on an empty buffer");
  const bool guided = options_.kind == AgentKind::kGuideBoot && options_.augment;
  for (std::size_t k = 0; k < members_.size(); ++k) {
    Member& m = members_[k];
    std::vector<Interaction> batch =
        bootstrap_resample(buffer_, options_.bootstrap_size, m.resample_rng);
    if (guided) batch = augment_with_fakes(batch, guidance_, m.fake_rng);
    if (observer_) observer_(k, batch);
    adam_step(*m.model, m.model->grad_logloss(batch), m.adam);
  }
}

// ------------------------------------------------------ OnlineEnsembleAgent

OnlineEnsembleAgent::OnlineEnsembleAgent(const AgentOptions& options, const FieldLayout& layout,
                                         const RngStream& stream)
    : options_(options),
      layout_(layout),
      guidance_(layout, guidance_alpha(options), options.density),
      select_rng_(stream.derive("select")) {
  require_positive(options.buffer_capacity, "buffer capacity");
  require_positive(options.minibatches, "minibatch count");
  if (options.minibatches > options.buffer_capacity) {
    throw std::invalid_argument("minibatch count exceeds buffer capacity");
  }
  const std::size_t k_models = options.kind == AgentKind::kGreedyOnline ? 1 : options.models;
  require_positive(k_models, "model count");
  for (std::size_t k = 0; k < k_models; ++k) {
    RngStream model_rng = stream.derive("model-" + std::to_string(k));
    auto model = init_model(options.model, layout, model_rng, options.mlp_shape);
    AdamState adam = AdamState::for_model(*model, options.adam);
    members_.push_back(Member{std::move(model), std::move(adam), model_rng.derive("shuffle"),
                              model_rng.derive("fakes"), model_rng.derive("poisson")});
  }
  buffer_.reserve(options.buffer_capacity);
}

std::size_t OnlineEnsembleAgent::select(const CandidateSet& candidates, std::size_t) {
  last_model_ = options_.kind == AgentKind::kGreedyOnline
                    ? 0
                    : select_rng_.uniform_index(members_.size());
  return greedy_select(*members_[last_model_].model, candidates);
}

void OnlineEnsembleAgent::observe(const Interaction& interaction) {
  buffer_.push_back(interaction);
  if (buffer_.size() >= options_.buffer_capacity) flush();
}

void OnlineEnsembleAgent::flush() {
  if (buffer_.empty()) throw std::invalid_argument("flush of an empty online buffer");
  const bool guided = options_.kind == AgentKind::kOnlineGuideBoot && options_.augment;
  if (guided) {
    for (const auto& s : buffer_) guidance_.update_counts(s.features);
  }
  for (std::size_t k = 0; k < members_.size(); ++k) {
    Member& m = members_[k];
    std::vector<Interaction> data;
    if (options_.kind == AgentKind::kObb) {
      for (const auto& s : buffer_) {
        for (std::uint32_t w = m.poisson_rng.poisson(1.0); w > 0; --w) data.push_back(s);
      }
      if (data.empty()) continue;
    } else {
      data = buffer_;
    }
    auto batches = shuffle_split(data, std::min(options_.minibatches, data.size()), m.shuffle_rng);
    for (auto& batch : batches) {
      if (guided) batch = augment_with_fakes(batch, guidance_, m.fake_rng);
      if (observer_) observer_(k, batch);
      adam_step(*m.model, m.model->grad_logloss(batch), m.adam);
    }
  }
  buffer_.clear();
  ++flushes_;
}

// -------------------------------------------------------- SingleModelAgent

SingleModelAgent::SingleModelAgent(const AgentOptions& options, const FieldLayout& layout,
                                   const RngStream& stream)
    : options_(options),
      layout_(layout),
      counts_(static_cast<std::size_t>(layout.action_cardinality())),
      select_rng_(stream.derive("select")),
      resample_rng_(stream.derive("model-0").derive("resample")),
      shuffle_rng_(stream.derive("model-0").derive("shuffle")),
      dropout_rng_(stream.derive("model-0").derive("dropout")) {
  if (options.kind == AgentKind::kMcDropout && options.model != ModelKind::kMlp) {
    throw std::invalid_argument("mc_dropout requires the mlp reward model");
  }
  if (options.update == UpdateMode::kReplay) {
    require_positive(options.bootstrap_size, "bootstrap size");
  } else {
    require_positive(options.buffer_capacity, "buffer capacity");
    require_positive(options.minibatches, "minibatch count");
  }
  RngStream model_rng = stream.derive("model-0");
  model_ = init_model(options.model, layout, model_rng, options.mlp_shape);
  adam_ = AdamState::for_model(*model_, options.adam);
}

std::size_t SingleModelAgent::select(const CandidateSet& candidates, std::size_t step) {
  switch (options_.kind) {
    case AgentKind::kEpsilonGreedy:
      return epsilon_greedy_select(*model_, candidates, options_.epsilon, select_rng_);
    case AgentKind::kEpsilonGreedyDecay: {
      const std::size_t t = std::min(step > 0 ? step - 1 : 0, options_.horizon);
      return epsilon_greedy_select(
          *model_, candidates, epsilon_schedule(t, options_.horizon, options_.epsilon),
          select_rng_);
    }
    case AgentKind::kDeepUcb1: {
      std::vector<double> scores(candidates.size());
      std::size_t first_unseen = candidates.size();
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto count = counts_.impressions.at(static_cast<std::size_t>(candidates[i].action()));
        if (count == 0) {
          first_unseen = std::min(first_unseen, i);
          continue;
        }
        scores[i] = deep_ucb1_score(model_->predict(candidates[i]), std::max<std::size_t>(step, 1),
                                    count, options_.alpha);
      }
      // An unseen action scores +infinity; the lowest such index wins.
      if (first_unseen < candidates.size()) return first_unseen;
      return argmax_tiebreak(scores);
    }
    case AgentKind::kDeepTsBeta: {
      std::vector<double> scores(candidates.size());
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto count = counts_.impressions.at(static_cast<std::size_t>(candidates[i].action()));
        scores[i] = deep_ts_beta_sample(model_->predict(candidates[i]), count, options_.shaping,
                                        select_rng_);
      }
      return argmax_tiebreak(scores);
    }
    case AgentKind::kMcDropout:
      return mc_dropout_select(static_cast<const Mlp&>(*model_), candidates,
                               options_.dropout_rate, select_rng_);
    default:
      return greedy_select(*model_, candidates);
  }
}

void SingleModelAgent::train_on(std::span<const Interaction> batch) {
  Gradient g = options_.kind == AgentKind::kMcDropout
                   ? static_cast<const Mlp&>(*model_).grad_logloss_dropout(
                         batch, options_.dropout_rate, dropout_rng_)
                   : model_->grad_logloss(batch);
  adam_step(*model_, g, adam_);
}

void SingleModelAgent::observe(const Interaction& interaction) {
  counts_.record(interaction.features.action(), interaction.reward);
  history_.push_back(interaction);
  if (options_.update == UpdateMode::kReplay) {
    train_on(bootstrap_resample(history_, options_.bootstrap_size, resample_rng_));
    return;
  }
  if (history_.size() < options_.buffer_capacity) return;
  for (const auto& batch :
       shuffle_split(history_, std::min(options_.minibatches, history_.size()), shuffle_rng_)) {
    train_on(batch);
  }
  history_.clear();
}

// ------------------------------------------------------------ BayesGlmAgent

BayesGlmAgent::BayesGlmAgent(const AgentOptions& options, const FieldLayout& layout,
                             const RngStream& stream)
    : options_(options),
      layout_(layout),
      state_(one_hot_dim(layout), options.ridge),
      select_rng_(stream.derive("select")) {
  require_positive(options.refit_period, "refit period");
}

std::size_t BayesGlmAgent::select(const CandidateSet& candidates, std::size_t step) {
  if (options_.kind == AgentKind::kGlmUcb) {
    return glm_ucb_select(state_, layout_, candidates, static_cast<double>(step));
  }
  return ts_blr_sample_select(state_, layout_, candidates, select_rng_);
}

void BayesGlmAgent::observe(const Interaction& interaction) {
  layout_.check(interaction.features);
  std::vector<Code> key(interaction.features.codes.begin(), interaction.features.codes.end());
  auto& row = rows_[key];
  row.first += 1.0;
  row.second += interaction.reward;
  if (++pending_ >= options_.refit_period) refit();
}

void BayesGlmAgent::refit() {
  std::vector<WeightedRow> rows;
  rows.reserve(rows_.size());
  for (const auto& [key, stats] : rows_) {
    FeatureVector x;
    x.codes.assign(key.begin(), key.end());
    x.action_field = layout_.action_field;
    rows.push_back(WeightedRow{one_hot(layout_, x), stats.first, stats.second});
  }
  state_.refit(rows);
  pending_ = 0;
}

// ---------------------------------------------------------------- factory

std::unique_ptr<Agent> make_agent(const AgentOptions& options, const FieldLayout& layout,
                                  const RngStream& stream) {
  switch (options.kind) {
    case AgentKind::kGuideBoot:
    case AgentKind::kBootstrap:
    case AgentKind::kGiro:
      return std::make_unique<ReplayEnsembleAgent>(options, layout, stream);
    case AgentKind::kOnlineGuideBoot:
    case AgentKind::kObb:
    case AgentKind::kGreedyOnline:
      return std::make_unique<OnlineEnsembleAgent>(options, layout, stream);
    case AgentKind::kEpsilonGreedy:
    case AgentKind::kEpsilonGreedyDecay:
    case AgentKind::kDeepUcb1:
    case AgentKind::kDeepTsBeta:
    case AgentKind::kMcDropout:
      return std::make_unique<SingleModelAgent>(options, layout, stream);
    case AgentKind::kGlmUcb:
    case AgentKind::kTsBlr:
      return std::make_unique<BayesGlmAgent>(options, layout, stream);
    case AgentKind::kUniformRandom:
      return std::make_unique<UniformRandomAgent>(stream);
  }
  throw std::invalid_argument("unknown agent kind");
}

}  // namespace guideboot
