#include "guideboot/oracles.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace guideboot::oracles {
namespace {

void check_counts(std::uint64_t n, std::uint64_t n_s) {
  if (n_s > n) throw std::invalid_argument("successes exceed trials");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be positive and finite");
  }
}

// Running mean / sum of squared deviations (Welford), mergeable.
struct Accumulator {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const Accumulator& other) {
    if (other.count == 0.0) return;
    double total = count + other.count;
    double delta = other.mean - mean;
    mean += delta * other.count / total;
    m2 += other.m2 + delta * delta * count * other.count / total;
    count = total;
  }
};

Accumulator run_trials(double alpha, std::uint64_t n, std::uint64_t n_s, std::uint64_t trials,
                       RngStream rng) {
  const double fake_p = alpha / static_cast<double>(n);
  Accumulator acc;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint64_t ones = 0;
    std::uint64_t total = n;
    for (std::uint64_t i = 0; i < n; ++i) {
      // Points 0..n_s-1 of the dataset are the successes.
      if (rng.uniform_index(n) < n_s) ++ones;
      if (rng.bernoulli(fake_p)) {
        ++ones;
        ++total;
      }
      if (rng.bernoulli(fake_p)) ++total;
    }
    acc.add(static_cast<double>(ones) / static_cast<double>(total));
  }
  return acc;
}

std::vector<double> binomial_pmf(std::uint64_t n, double p) {
  std::vector<double> pmf(n + 1, 0.0);
  for (std::uint64_t k = 0; k <= n; ++k) {
    double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                        std::lgamma(static_cast<double>(k) + 1.0) -
                        std::lgamma(static_cast<double>(n - k) + 1.0);
    double lp = 0.0;
    if (k > 0) lp += static_cast<double>(k) * std::log(p);
    if (n - k > 0) lp += static_cast<double>(n - k) * std::log1p(-p);
    if ((p == 0.0 && k > 0) || (p == 1.0 && k < n)) continue;
    pmf[k] = std::exp(log_choose + lp);
  }
  return pmf;
}

}  // namespace

MomentPair beta_posterior_stats(double alpha, std::uint64_t n, std::uint64_t n_s) {
  check_alpha(alpha);
  check_counts(n, n_s);
  const double a = alpha + static_cast<double>(n_s);
  const double b = alpha + static_cast<double>(n - n_s);
  const double s = a + b;
  return {a / s, a * b / (s * s * (s + 1.0))};
}

MomentPair bootstrap_estimator_stats(std::uint64_t n, std::uint64_t n_s) {
  if (n == 0) throw std::invalid_argument("bootstrap estimator needs n >= 1");
  check_counts(n, n_s);
  const double nn = static_cast<double>(n);
  const double s = static_cast<double>(n_s);
  return {s / nn, s * (nn - s) / (nn * nn * nn)};
}

MomentPair guideboot_estimator_stats(double alpha, std::uint64_t n, std::uint64_t n_s) {
  check_alpha(alpha);
  check_counts(n, n_s);
  const double a = alpha + static_cast<double>(n_s);
  const double b = alpha + static_cast<double>(n - n_s);
  const double s = a + b;
  return {a / s, a * b / (s * s * s)};
}

MomentPair mc_guideboot_estimator(double alpha, std::uint64_t n, std::uint64_t n_s,
                                  std::uint64_t trials, RngStream& rng, unsigned workers) {
  check_alpha(alpha);
  check_counts(n, n_s);
  if (n == 0) throw std::invalid_argument("mc_guideboot_estimator needs n >= 1");
  if (trials == 0) throw std::invalid_argument("mc_guideboot_estimator needs trials >= 1");
  if (workers == 0) workers = 1;

  std::vector<Accumulator> parts(workers);
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t share = trials / workers + (w < trials % workers ? 1 : 0);
    RngStream stream = rng.derive("worker-" + std::to_string(w));
    if (workers == 1) {
      parts[w] = run_trials(alpha, n, n_s, share, std::move(stream));
    } else {
      threads.emplace_back([&, w, share, stream]() mutable {
        parts[w] = run_trials(alpha, n, n_s, share, std::move(stream));
      });
    }
  }
  for (auto& t : threads) t.join();

  Accumulator total;
  for (const auto& p : parts) total.merge(p);
  return {total.mean, total.m2 / total.count};
}

MomentPair exact_guideboot_construction(double alpha, std::uint64_t n, std::uint64_t n_s) {
  check_alpha(alpha);
  check_counts(n, n_s);
  if (n == 0) throw std::invalid_argument("exact construction needs n >= 1");
  const double fake_p = alpha / static_cast<double>(n);
  if (fake_p > 1.0) throw std::invalid_argument("alpha / n must not exceed 1");
  const auto real = binomial_pmf(n, static_cast<double>(n_s) / static_cast<double>(n));
  const auto fake = binomial_pmf(n, fake_p);

  double m1 = 0.0;
  double m2 = 0.0;
  for (std::uint64_t s = 0; s <= n; ++s) {
    if (real[s] == 0.0) continue;
    for (std::uint64_t f1 = 0; f1 <= n; ++f1) {
      const double w1 = real[s] * fake[f1];
      if (w1 == 0.0) continue;
      for (std::uint64_t f0 = 0; f0 <= n; ++f0) {
        const double w = w1 * fake[f0];
        const double v = static_cast<double>(s + f1) / static_cast<double>(n + f1 + f0);
        m1 += w * v;
        m2 += w * v * v;
      }
    }
  }
  return {m1, m2 - m1 * m1};
}

double standard_error(const MomentPair& moments, std::uint64_t trials) {
  return std::sqrt(moments.variance / static_cast<double>(trials));
}

}  // namespace guideboot::oracles
