#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "guideboot/guidance.h"
#include "guideboot/oracles.h"

using namespace guideboot;

namespace {

const FieldLayout kLayout{{25, 5, 5}, 0};

FeatureVector fv(std::initializer_list<Code> codes) {
  FeatureVector x;
  x.codes.assign(codes.begin(), codes.end());
  return x;
}

FeatureVector random_input(RngStream& rng, const FieldLayout& layout) {
  FeatureVector x;
  for (Code c : layout.cardinalities) {
    x.codes.push_back(static_cast<Code>(rng.uniform_index(static_cast<std::size_t>(c))));
  }
  return x;
}

std::vector<Interaction> tagged_buffer(std::size_t n) {
  std::vector<Interaction> buf;
  for (std::size_t i = 0; i < n; ++i) buf.push_back(make_interaction(fv({0, 0, 0}), 0, i + 1));
  return buf;
}

}  // namespace

TEST_CASE("update_counts") {
  GuidanceState g(kLayout, 1.0, DensityKind::kActionCount);
  g.update_counts(fv({3, 1, 2}));
  CHECK(g.action_count(3) == 1);
  CHECK(g.count(1, 1) == 1);
  CHECK(g.count(2, 2) == 1);
  for (int i = 0; i < 9; ++i) g.update_counts(fv({3, 1, 2}));
  CHECK(g.action_count(3) == 10);
  CHECK(g.observed() == 10);
}

TEST_CASE("counts never decrease and per-field totals equal observations") {
  GuidanceState g(kLayout, 1.0, DensityKind::kHarmonic);
  RngStream rng(1);
  std::vector<std::vector<std::uint64_t>> prev(3);
  for (std::size_t j = 0; j < 3; ++j) prev[j].assign(kLayout.cardinalities[j], 0);
  for (int t = 0; t < 500; ++t) {
    g.update_counts(random_input(rng, kLayout));
    for (std::size_t j = 0; j < 3; ++j) {
      std::uint64_t total = 0;
      for (Code c = 0; c < kLayout.cardinalities[j]; ++c) {
        REQUIRE(g.count(j, c) >= prev[j][c]);
        prev[j][c] = g.count(j, c);
        total += g.count(j, c);
      }
      REQUIRE(total == g.observed());
    }
  }
}

TEST_CASE("density examples") {
  GuidanceState action(kLayout, 1.0, DensityKind::kActionCount);
  for (int i = 0; i < 4; ++i) action.update_counts(fv({7, static_cast<Code>(i % 5), 0}));
  CHECK(action.density(fv({7, 4, 4})) == 4.0);

  FieldLayout two{{10, 10}, 0};
  GuidanceState harmonic(two, 1.0, DensityKind::kHarmonic);
  for (int i = 0; i < 3; ++i) harmonic.update_counts(fv({1, 2}));
  for (int i = 0; i < 3; ++i) harmonic.update_counts(fv({5, 4}));
  for (int i = 0; i < 3; ++i) harmonic.update_counts(fv({6, 4}));
  // Count(field 0 = 1) is 3 and Count(field 1 = 4) is 6.
  REQUIRE(harmonic.count(0, 1) == 3);
  REQUIRE(harmonic.count(1, 4) == 6);
  CHECK(harmonic.density(fv({1, 4})) == doctest::Approx(2.0).epsilon(1e-15));

  GuidanceState ones(kLayout, 1.0, DensityKind::kHarmonic);
  ones.update_counts(fv({0, 0, 0}));
  CHECK(ones.density(fv({0, 0, 0})) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ones.guidance_value(fv({0, 0, 0})) == 1.0);
  CHECK(ones.density(fv({0, 0, 1})) == 0.0);
}

TEST_CASE("guidance examples") {
  GuidanceState g(kLayout, 1.0, DensityKind::kActionCount);
  for (int i = 0; i < 4; ++i) g.update_counts(fv({2, 0, 0}));
  g.update_counts(fv({5, 0, 0}));
  CHECK(g.guidance_value(fv({2, 1, 1})) == 0.25);
  CHECK(g.guidance_value(fv({5, 1, 1})) == 1.0);
  CHECK(g.guidance_value(fv({9, 1, 1})) == 1.0);
  CHECK_THROWS_AS(GuidanceState(kLayout, 0.0, DensityKind::kHarmonic), std::invalid_argument);
}

TEST_CASE("guidance is in (0, 1] and nonincreasing in every count") {
  RngStream rng(2);
  for (DensityKind kind : {DensityKind::kActionCount, DensityKind::kHarmonic}) {
    for (int table = 0; table < 50; ++table) {
      const double alpha = 0.1 + 5.0 * rng.uniform();
      GuidanceState g(kLayout, alpha, kind);
      const int fill = static_cast<int>(rng.uniform_index(300));
      for (int i = 0; i < fill; ++i) g.update_counts(random_input(rng, kLayout));
      std::vector<FeatureVector> probes;
      for (int i = 0; i < 20; ++i) probes.push_back(random_input(rng, kLayout));
      std::vector<double> before;
      for (const auto& x : probes) {
        const double v = g.guidance_value(x);
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
        before.push_back(v);
      }
      for (int i = 0; i < 10; ++i) g.update_counts(random_input(rng, kLayout));
      for (std::size_t i = 0; i < probes.size(); ++i) {
        REQUIRE(g.guidance_value(probes[i]) <= before[i]);
      }
    }
  }
}

TEST_CASE("augment_with_fakes with g = 1 adds both fakes") {
  GuidanceState g(kLayout, 1.0, DensityKind::kActionCount);
  RngStream rng(3);
  std::vector<Interaction> batch{make_interaction(fv({1, 2, 3}), 0, 5)};
  auto out = augment_with_fakes(batch, g, rng);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == batch[0]);
  std::multiset<int> rewards{out[1].reward, out[2].reward};
  CHECK(rewards == std::multiset<int>{0, 1});
  CHECK(out[1].features == batch[0].features);
  CHECK(out[2].features == batch[0].features);
}

TEST_CASE("augment_with_fakes with vanishing guidance returns the input") {
  GuidanceState g(kLayout, 1e-300, DensityKind::kActionCount);
  g.update_counts(fv({1, 2, 3}));
  RngStream rng(4);
  std::vector<Interaction> batch(50, make_interaction(fv({1, 2, 3}), 1));
  CHECK(augment_with_fakes(batch, g, rng) == batch);
}

TEST_CASE("augment_with_fakes at g = 0.5 adds one fake on average") {
  GuidanceState g(kLayout, 1.0, DensityKind::kActionCount);
  g.update_counts(fv({1, 0, 0}));
  g.update_counts(fv({1, 0, 0}));
  REQUIRE(g.guidance_value(fv({1, 0, 0})) == 0.5);
  RngStream rng(5);
  std::vector<Interaction> batch{make_interaction(fv({1, 0, 0}), 1)};
  const int n = 100000;
  double sum = 0.0, positives = 0.0;
  for (int i = 0; i < n; ++i) {
    auto out = augment_with_fakes(batch, g, rng);
    sum += static_cast<double>(out.size());
    for (std::size_t j = 1; j < out.size(); ++j) positives += out[j].reward;
  }
  // Two independent Bernoulli(0.5) coins: variance 0.5.
  CHECK(std::abs(sum / n - 2.0) < 3.0 * std::sqrt(0.5 / n));
  CHECK(std::abs(positives / n - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("fake coins are independent") {
  GuidanceState g(kLayout, 1.0, DensityKind::kActionCount);
  g.update_counts(fv({1, 0, 0}));
  g.update_counts(fv({1, 0, 0}));
  RngStream rng(6);
  std::vector<Interaction> batch{make_interaction(fv({1, 0, 0}), 1)};
  std::map<std::size_t, int> sizes;
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++sizes[augment_with_fakes(batch, g, rng).size()];
  // A shared coin would never give exactly one fake.
  CHECK(std::abs(sizes[2] / double(n) - 0.5) < 4.0 * std::sqrt(0.25 / n));
  CHECK(std::abs(sizes[3] / double(n) - 0.25) < 4.0 * std::sqrt(0.1875 / n));
}

TEST_CASE("bootstrap_resample") {
  RngStream rng(7);
  std::vector<Interaction> one{make_interaction(fv({1, 1, 1}), 1, 1)};
  auto copies = bootstrap_resample(one, 37, rng);
  CHECK(copies.size() == 37);
  for (const auto& c : copies) CHECK(c == one[0]);
  CHECK_THROWS_AS(bootstrap_resample(std::vector<Interaction>{}, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_resample(one, 0, rng), std::invalid_argument);
}

TEST_CASE("bootstrap_resample distinct fraction is about 1 - 1/e") {
  RngStream rng(8);
  auto buf = tagged_buffer(1000);
  double total = 0.0;
  for (int r = 0; r < 1000; ++r) {
    std::set<std::size_t> distinct;
    for (const auto& s : bootstrap_resample(buf, 1000, rng)) distinct.insert(s.step);
    total += static_cast<double>(distinct.size()) / 1000.0;
  }
  const double expected = 1.0 - std::pow(1.0 - 1.0 / 1000.0, 1000.0);
  CHECK(std::abs(total / 1000.0 - expected) < 0.01);
}

TEST_CASE("bootstrap_resample marginals are uniform") {
  RngStream rng(9);
  auto buf = tagged_buffer(4);
  std::vector<double> hist(4, 0.0);
  const int n = 100000;
  for (int i = 0; i < n / 10; ++i) {
    for (const auto& s : bootstrap_resample(buf, 10, rng)) hist[s.step - 1] += 1;
  }
  const double se = std::sqrt(n * 0.25 * 0.75);
  for (double h : hist) CHECK(std::abs(h - 0.25 * n) < 3.0 * se);
}

TEST_CASE("shuffle_split examples") {
  RngStream rng(10);
  auto buf = tagged_buffer(512);
  auto parts = shuffle_split(buf, 4, rng);
  REQUIRE(parts.size() == 4);
  std::multiset<std::size_t> seen;
  for (const auto& p : parts) {
    CHECK(p.size() == 128);
    for (const auto& s : p) seen.insert(s.step);
  }
  CHECK(seen.size() == 512);
  CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == 512);

  auto whole = shuffle_split(buf, 1, rng);
  REQUIRE(whole.size() == 1);
  CHECK(std::is_permutation(whole[0].begin(), whole[0].end(), buf.begin()));

  auto ten = tagged_buffer(10);
  auto split = shuffle_split(ten, 3, rng);
  REQUIRE(split.size() == 3);
  CHECK(split[0].size() == 4);
  CHECK(split[1].size() == 3);
  CHECK(split[2].size() == 3);

  CHECK_THROWS_AS(shuffle_split(ten, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(shuffle_split(ten, 11, rng), std::invalid_argument);
}

TEST_CASE("shuffle_split order is a uniform permutation") {
  RngStream rng(11);
  auto buf = tagged_buffer(3);
  std::map<std::vector<std::size_t>, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    auto parts = shuffle_split(buf, 1, rng);
    std::vector<std::size_t> order;
    for (const auto& s : parts[0]) order.push_back(s.step);
    ++counts[order];
  }
  REQUIRE(counts.size() == 6);
  const double p = 1.0 / 6.0;
  for (const auto& [order, c] : counts) {
    CHECK(std::abs(c - n * p) < 4.0 * std::sqrt(n * p * (1 - p)));
  }
}

TEST_CASE("single-arm resample-and-augment matches the construction oracle") {
  // One action pulled n times with n_s successes; n-out-of-n resample, then
  // fakes at g = alpha / n from the action-count density.
  const FieldLayout layout{{1}, 0};
  const double alpha = 1.0;
  const std::uint64_t n = 20;
  RngStream rng(12);
  for (std::uint64_t n_s : {0ULL, 3ULL, 10ULL}) {
    GuidanceState g(layout, alpha, DensityKind::kActionCount);
    std::vector<Interaction> data;
    for (std::uint64_t i = 0; i < n; ++i) {
      data.push_back(make_interaction(fv({0}), i < n_s ? 1 : 0));
      g.update_counts(data.back().features);
    }
    REQUIRE(g.guidance_value(fv({0})) == doctest::Approx(alpha / n));
    const int trials = 200000;
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      auto batch = augment_with_fakes(bootstrap_resample(data, n, rng), g, rng);
      double r = 0.0;
      for (const auto& s : batch) r += s.reward;
      sum += r / static_cast<double>(batch.size());
    }
    auto exact = oracles::exact_guideboot_construction(alpha, n, n_s);
    const double se = std::sqrt(exact.variance / trials);
    CHECK(std::abs(sum / trials - exact.mean) < 4.0 * se);
    if (2 * n_s == n) {
      CHECK(exact.mean == doctest::Approx(oracles::guideboot_estimator_stats(alpha, n, n_s).mean));
    }
  }
}
