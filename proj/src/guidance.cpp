#include "guideboot/guidance.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace guideboot {

GuidanceState::GuidanceState(FieldLayout layout, double alpha, DensityKind kind)
    : layout_(std::move(layout)), alpha_(alpha), kind_(kind) {
  if (!(alpha_ > 0.0)) throw std::invalid_argument("guidance alpha must be positive");
  for (Code card : layout_.cardinalities) counts_.emplace_back(static_cast<std::size_t>(card), 0);
}

void GuidanceState::update_counts(const FeatureVector& x) {
  layout_.check(x);
  for (std::size_t j = 0; j < x.codes.size(); ++j) {
    ++counts_[j][static_cast<std::size_t>(x.codes[j])];
  }
  ++observed_;
}

std::uint64_t GuidanceState::count(std::size_t field, Code code) const {
  return counts_.at(field).at(static_cast<std::size_t>(code));
}

std::uint64_t GuidanceState::action_count(Code action) const {
  return count(layout_.action_field, action);
}

double GuidanceState::density(const FeatureVector& x) const {
  layout_.check(x);
  if (kind_ == DensityKind::kActionCount) {
    return static_cast<double>(action_count(x.action()));
  }
  double inverse_sum = 0.0;
  for (std::size_t j = 0; j < x.codes.size(); ++j) {
    std::uint64_t c = counts_[j][static_cast<std::size_t>(x.codes[j])];
    if (c == 0) return 0.0;
    inverse_sum += 1.0 / static_cast<double>(c);
  }
  return 1.0 / inverse_sum;
}

double GuidanceState::guidance_value(const FeatureVector& x) const {
  double rho = density(x);
  if (rho <= alpha_) return 1.0;
  return alpha_ / rho;
}

std::vector<Interaction> augment_with_fakes(std::span<const Interaction> batch,
                                            const GuidanceState& guidance, RngStream& rng) {
  std::vector<Interaction> out(batch.begin(), batch.end());
  for (const auto& sample : batch) {
    double g = guidance.guidance_value(sample.features);
    if (rng.bernoulli(g)) out.push_back(Interaction{sample.features, 1, sample.step});
    if (rng.bernoulli(g)) out.push_back(Interaction{sample.features, 0, sample.step});
  }
  return out;
}

std::vector<Interaction> bootstrap_resample(std::span<const Interaction> buffer, std::size_t b,
                                            RngStream& rng) {
  if (buffer.empty()) throw std::invalid_argument("bootstrap_resample: empty buffer");
  if (b == 0) throw std::invalid_argument("bootstrap_resample: batch size must be positive");
  std::vector<Interaction> out;
  out.reserve(b);
  for (std::size_t i = 0; i < b; ++i) out.push_back(buffer[rng.uniform_index(buffer.size())]);
  return out;
}

std::vector<std::vector<Interaction>> shuffle_split(std::span<const Interaction> buffer,
                                                    std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("shuffle_split: batch count must be positive");
  if (buffer.size() < n) {
    throw std::invalid_argument("shuffle_split: buffer has fewer samples than batches");
  }
  std::vector<std::size_t> order(buffer.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t base = buffer.size() / n;
  const std::size_t extra = buffer.size() % n;
  std::vector<std::vector<Interaction>> batches(n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t size = base + (i < extra ? 1 : 0);
    batches[i].reserve(size);
    for (std::size_t k = 0; k < size; ++k) batches[i].push_back(buffer[order[next++]]);
  }
  return batches;
}

}  // namespace guideboot
