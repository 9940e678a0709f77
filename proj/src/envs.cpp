#include "guideboot/envs.h"

#include <cmath>
#include <stdexcept>

namespace guideboot {
namespace {

std::vector<double> uniform_table(RngStream& rng, std::size_t n, double half_width) {
  std::vector<double> table(n);
  for (auto& w : table) w = -half_width + 2.0 * half_width * rng.uniform();
  return table;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

FieldLayout SyntheticShape::layout() const {
  FieldLayout layout;
  layout.cardinalities.push_back(actions);
  layout.cardinalities.insert(layout.cardinalities.end(), attribute_cardinalities.begin(),
                              attribute_cardinalities.end());
  layout.action_field = 0;
  return layout;
}

SyntheticGlmSpec generate_glm_env(RngStream& rng, const SyntheticShape& shape) {
  SyntheticGlmSpec spec;
  spec.shape = shape;
  for (Code card : shape.layout().cardinalities) {
    spec.weights.push_back(uniform_table(rng, static_cast<std::size_t>(card), 0.25));
  }
  return spec;
}

NonlinearSyntheticSpec generate_nonlinear_env(RngStream& rng, const SyntheticShape& shape) {
  if (shape.attribute_cardinalities.size() != 2) {
    throw std::invalid_argument("nonlinear environment needs exactly two attribute fields");
  }
  NonlinearSyntheticSpec spec;
  spec.shape = shape;
  spec.action_weights = uniform_table(rng, static_cast<std::size_t>(shape.actions), 0.25);
  for (Code i = 0; i < shape.attribute_cardinalities[0]; ++i) {
    spec.pair_weights.push_back(
        uniform_table(rng, static_cast<std::size_t>(shape.attribute_cardinalities[1]), 0.5));
  }
  return spec;
}

CandidateSet draw_candidates(const SyntheticShape& shape, RngStream& rng) {
  CandidateSet set;
  set.candidates.reserve(static_cast<std::size_t>(shape.actions));
  for (Code a = 0; a < shape.actions; ++a) {
    FeatureVector x;
    x.codes.push_back(a);
    for (Code card : shape.attribute_cardinalities) {
      x.codes.push_back(static_cast<Code>(rng.uniform_index(static_cast<std::size_t>(card))));
    }
    set.candidates.push_back(std::move(x));
  }
  return set;
}

double expected_reward(const SyntheticGlmSpec& spec, const FeatureVector& x) {
  spec.layout().check(x);
  double z = spec.intercept;
  for (std::size_t j = 0; j < x.codes.size(); ++j) {
    z += spec.weights[j][static_cast<std::size_t>(x.codes[j])];
  }
  return sigmoid(z);
}

double expected_reward(const NonlinearSyntheticSpec& spec, const FeatureVector& x) {
  spec.layout().check(x);
  double z = spec.intercept + spec.action_weights[static_cast<std::size_t>(x.codes[0])] +
             spec.pair_weights[static_cast<std::size_t>(x.codes[1])]
                              [static_cast<std::size_t>(x.codes[2])];
  return sigmoid(z);
}

int sample_feedback(double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("feedback probability outside [0, 1]");
  }
  return rng.uniform() < p ? 1 : 0;
}

EnvStep GlmEnvironment::next(std::size_t, RngStream& rng) {
  EnvStep step{draw_candidates(spec_.shape, rng), {}};
  step.expected.reserve(step.candidates.size());
  for (const auto& x : step.candidates.candidates) {
    step.expected.push_back(expected_reward(spec_, x));
  }
  return step;
}

EnvStep NonlinearEnvironment::next(std::size_t, RngStream& rng) {
  EnvStep step{draw_candidates(spec_.shape, rng), {}};
  step.expected.reserve(step.candidates.size());
  for (const auto& x : step.candidates.candidates) {
    step.expected.push_back(expected_reward(spec_, x));
  }
  return step;
}

LoggedPoolEnvironment::LoggedPoolEnvironment(std::shared_ptr<const LoggedPool> pool,
                                             FieldLayout layout)
    : pool_(std::move(pool)), layout_(std::move(layout)) {
  if (pool_->steps.empty()) throw std::invalid_argument("logged pool has no steps");
  for (const auto& step : pool_->steps) {
    for (const auto& x : step.candidates.candidates) layout_.check(x);
  }
}

EnvStep LoggedPoolEnvironment::next(std::size_t step, RngStream&) {
  if (step == 0 || step > pool_->steps.size()) {
    throw std::out_of_range("logged pool exhausted at step " + std::to_string(step));
  }
  const LoggedStep& logged = pool_->steps[step - 1];
  return EnvStep{logged.candidates, logged.probabilities};
}

}  // namespace guideboot
