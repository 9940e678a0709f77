#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guideboot/agents.h"
#include "guideboot/envs.h"

namespace guideboot::testing {

struct ReductionResult {
  bool identical = true;
  std::size_t compared = 0;
  std::string detail;
};

// Runs GuideBoot (augmentation on, alpha small enough that g is effectively
// zero) and the Bootstrap baseline side by side from the same agent stream on
// the same synthetic episode, and compares every training batch.
inline ReductionResult guideboot_vs_bootstrap_batches(std::uint64_t seed, std::size_t steps,
                                                      std::size_t models = 3,
                                                      std::size_t b = 64) {
  RngStream root(seed);
  RngStream env_rng = root.derive("env");
  RngStream spec_rng = env_rng.derive("spec");
  const SyntheticGlmSpec spec = generate_glm_env(spec_rng);
  const FieldLayout layout = spec.layout();

  AgentOptions guided;
  guided.kind = AgentKind::kGuideBoot;
  guided.models = models;
  guided.bootstrap_size = b;
  guided.alpha = 1e-300;
  AgentOptions plain = guided;
  plain.kind = AgentKind::kBootstrap;

  ReplayEnsembleAgent a(guided, layout, root.derive("agent"));
  ReplayEnsembleAgent c(plain, layout, root.derive("agent"));
  std::vector<std::vector<Interaction>> seen_a, seen_c;
  a.set_batch_observer([&](std::size_t, std::span<const Interaction> batch) {
    seen_a.emplace_back(batch.begin(), batch.end());
  });
  c.set_batch_observer([&](std::size_t, std::span<const Interaction> batch) {
    seen_c.emplace_back(batch.begin(), batch.end());
  });

  RngStream cand_rng = env_rng.derive("candidates");
  RngStream fb_rng = env_rng.derive("feedback");
  ReductionResult out;
  for (std::size_t t = 1; t <= steps; ++t) {
    CandidateSet cands = draw_candidates(spec.shape, cand_rng);
    const std::size_t ia = a.select(cands, t);
    const std::size_t ic = c.select(cands, t);
    if (ia != ic) {
      out.identical = false;
      out.detail = "choices diverged at step " + std::to_string(t);
      return out;
    }
    const int r = sample_feedback(expected_reward(spec, cands[ia]), fb_rng);
    a.observe(make_interaction(cands[ia], r, t));
    c.observe(make_interaction(cands[ic], r, t));
    if (seen_a != seen_c) {
      out.identical = false;
      out.detail = "batches diverged at step " + std::to_string(t);
      return out;
    }
    out.compared += seen_a.size();
    seen_a.clear();
    seen_c.clear();
  }
  out.detail = std::to_string(out.compared) + " batches identical";
  return out;
}

// Online GuideBoot with K = 1 and vanishing guidance against a hand-driven
// greedy online learner (greedy_online_flush) sharing its init and shuffle
// streams; compares every parameter after each flush.
inline ReductionResult online_guideboot_vs_greedy(std::uint64_t seed, std::size_t flushes,
                                                  std::size_t capacity = 512,
                                                  std::size_t minibatches = 4,
                                                  ModelKind kind = ModelKind::kGlm) {
  RngStream root(seed);
  RngStream env_rng = root.derive("env");
  RngStream spec_rng = env_rng.derive("spec");
  const SyntheticGlmSpec spec = generate_glm_env(spec_rng);
  const FieldLayout layout = spec.layout();

  AgentOptions opts;
  opts.kind = AgentKind::kOnlineGuideBoot;
  opts.model = kind;
  opts.models = 1;
  opts.alpha = 1e-300;
  opts.buffer_capacity = capacity;
  opts.minibatches = minibatches;
  opts.mlp_shape = MlpShape{4, 16};
  const RngStream agent_stream = root.derive("agent");
  OnlineEnsembleAgent agent(opts, layout, agent_stream);

  RngStream model_rng = agent_stream.derive("model-0");
  auto greedy = init_model(kind, layout, model_rng, opts.mlp_shape);
  AdamState adam = AdamState::for_model(*greedy, opts.adam);
  RngStream shuffle_rng = model_rng.derive("shuffle");

  RngStream cand_rng = env_rng.derive("candidates");
  RngStream fb_rng = env_rng.derive("feedback");
  std::vector<Interaction> buffer;
  ReductionResult out;
  std::size_t t = 0;
  while (agent.flushes() < flushes) {
    ++t;
    CandidateSet cands = draw_candidates(spec.shape, cand_rng);
    const std::size_t ia = agent.select(cands, t);
    const std::size_t ig = greedy_select(*greedy, cands);
    if (ia != ig) {
      out.identical = false;
      out.detail = "choices diverged at step " + std::to_string(t);
      return out;
    }
    const int r = sample_feedback(expected_reward(spec, cands[ia]), fb_rng);
    const Interaction s = make_interaction(cands[ia], r, t);
    agent.observe(s);
    buffer.push_back(s);
    if (buffer.size() == capacity) {
      greedy_online_flush(*greedy, adam, buffer, minibatches, shuffle_rng);
      buffer.clear();
      auto pa = agent.model(0).params();
      auto pg = greedy->params();
      for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i] != pg[i]) {
          out.identical = false;
          out.detail = "parameter " + std::to_string(i) + " diverged after flush " +
                       std::to_string(agent.flushes());
          return out;
        }
      }
      out.compared += pa.size();
    }
  }
  out.detail = std::to_string(flushes) + " flushes, " + std::to_string(out.compared) +
               " parameter comparisons identical";
  return out;
}

}  // namespace guideboot::testing
