#pragma once

#include <cstdint>

#include "guideboot/rng.h"

namespace guideboot::oracles {

struct MomentPair {
  double mean = 0.0;
  double variance = 0.0;
};

// Moments of Beta(alpha + n_s, alpha + n - n_s), the posterior of a
// Bernoulli rate under a symmetric Beta(alpha, alpha) prior.
MomentPair beta_posterior_stats(double alpha, std::uint64_t n, std::uint64_t n_s);

// Moments of the n-out-of-n bootstrap mean: n * y ~ Bi(n, n_s / n).
MomentPair bootstrap_estimator_stats(std::uint64_t n, std::uint64_t n_s);

// Moments of the fake-sample-augmented bootstrap mean: same mean as the Beta
// posterior, variance (alpha + n_s)(alpha + n - n_s) / (2 alpha + n)^3.
MomentPair guideboot_estimator_stats(double alpha, std::uint64_t n, std::uint64_t n_s);

// Brute-force estimator. Each trial resamples n points with replacement from a
// dataset holding n_s ones and n - n_s zeros, then for every resampled point
// adds a fake 1 and a fake 0 on independent coins of probability alpha / n,
// and records the reward mean over real and fake points together. Returns the
// empirical mean and (population) variance over trials.
//
// Trials are split across `workers` derived streams and merged with the
// pairwise mean/variance combination; results depend on the worker count.
MomentPair mc_guideboot_estimator(double alpha, std::uint64_t n, std::uint64_t n_s,
                                  std::uint64_t trials, RngStream& rng,
                                  unsigned workers = 1);

// Exact moments of the mc_guideboot_estimator construction, by summing over
// the three independent binomial counts (resampled ones, fake ones, fake
// zeros). O(n^3); intended for n up to a few hundred.
MomentPair exact_guideboot_construction(double alpha, std::uint64_t n, std::uint64_t n_s);

// Standard error of the mean of `trials` draws with the given variance.
double standard_error(const MomentPair& moments, std::uint64_t trials);

}  // namespace guideboot::oracles
