#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <vector>

#include "guideboot/logged_pool.h"
#include "guideboot/rng.h"
#include "guideboot/types.h"

namespace guideboot {

double sigmoid(double z);

// Shape of a synthetic task: `actions` candidates per step, each with the
// action id in field 0 followed by uniformly drawn attribute fields.
struct SyntheticShape {
  Code actions = 25;
  std::vector<Code> attribute_cardinalities{5, 5};

  FieldLayout layout() const;
};

// Bernoulli GLM task: y = sigmoid(sum_j weights[j][code_j] + intercept).
struct SyntheticGlmSpec {
  SyntheticShape shape;
  std::vector<std::vector<double>> weights;  // one table per field
  double intercept = -1.0;

  FieldLayout layout() const { return shape.layout(); }
};

// Non-additive variant: y = sigmoid(w0[a] + pair[x1][x2] + intercept).
// Requires exactly two attribute fields.
struct NonlinearSyntheticSpec {
  SyntheticShape shape;
  std::vector<double> action_weights;
  std::vector<std::vector<double>> pair_weights;
  double intercept = -1.0;

  FieldLayout layout() const { return shape.layout(); }
};

// Coefficients i.i.d. U(-0.25, 0.25).
SyntheticGlmSpec generate_glm_env(RngStream& rng, const SyntheticShape& shape = {});
// Action weights U(-0.25, 0.25), pair table U(-0.5, 0.5).
NonlinearSyntheticSpec generate_nonlinear_env(RngStream& rng, const SyntheticShape& shape = {});

// One candidate per action, action code a at position a, attributes uniform.
CandidateSet draw_candidates(const SyntheticShape& shape, RngStream& rng);

double expected_reward(const SyntheticGlmSpec& spec, const FeatureVector& x);
double expected_reward(const NonlinearSyntheticSpec& spec, const FeatureVector& x);

// Bernoulli(p) draw; throws std::invalid_argument for p outside [0, 1].
int sample_feedback(double p, RngStream& rng);

template <typename Spec>
double best_expected(const Spec& spec, const CandidateSet& candidates) {
  double best = expected_reward(spec, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    best = std::max(best, expected_reward(spec, candidates[i]));
  }
  return best;
}

// Candidates for one step together with their groundtruth success rates.
struct EnvStep {
  CandidateSet candidates;
  std::vector<double> expected;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual FieldLayout layout() const = 0;
  // `step` is 1-based.
  virtual EnvStep next(std::size_t step, RngStream& rng) = 0;
  // Longest horizon this environment supports, if bounded.
  virtual std::optional<std::size_t> max_steps() const { return std::nullopt; }
};

class GlmEnvironment final : public Environment {
 public:
  explicit GlmEnvironment(SyntheticGlmSpec spec) : spec_(std::move(spec)) {}
  FieldLayout layout() const override { return spec_.layout(); }
  EnvStep next(std::size_t step, RngStream& rng) override;
  const SyntheticGlmSpec& spec() const { return spec_; }

 private:
  SyntheticGlmSpec spec_;
};

class NonlinearEnvironment final : public Environment {
 public:
  explicit NonlinearEnvironment(NonlinearSyntheticSpec spec) : spec_(std::move(spec)) {}
  FieldLayout layout() const override { return spec_.layout(); }
  EnvStep next(std::size_t step, RngStream& rng) override;
  const NonlinearSyntheticSpec& spec() const { return spec_; }

 private:
  NonlinearSyntheticSpec spec_;
};

// Replays a logged candidate pool; step t serves record t - 1.
class LoggedPoolEnvironment final : public Environment {
 public:
  LoggedPoolEnvironment(std::shared_ptr<const LoggedPool> pool, FieldLayout layout);
  FieldLayout layout() const override { return layout_; }
  EnvStep next(std::size_t step, RngStream& rng) override;
  std::optional<std::size_t> max_steps() const override { return pool_->steps.size(); }

 private:
  std::shared_ptr<const LoggedPool> pool_;
  FieldLayout layout_;
};

}  // namespace guideboot
