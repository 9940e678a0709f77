#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "guideboot/rng.h"
#include "guideboot/types.h"

namespace guideboot {

enum class DensityKind {
  kActionCount,  // rho(x) = Count(action id)
  kHarmonic,     // rho(x) = [sum_j 1 / Count(x_j)]^-1
};

// Counting tables behind the unnormalized density rho(x) and the guidance
// g(x) = min(alpha / rho(x), 1). Counts only grow.
class GuidanceState {
 public:
  GuidanceState(FieldLayout layout, double alpha, DensityKind kind);

  void update_counts(const FeatureVector& x);

  // Zero when any count in scope is zero.
  double density(const FeatureVector& x) const;
  // Probability of each fake sample; 1 for unseen inputs.
  double guidance_value(const FeatureVector& x) const;

  std::uint64_t count(std::size_t field, Code code) const;
  std::uint64_t action_count(Code action) const;
  std::uint64_t observed() const { return observed_; }

  double alpha() const { return alpha_; }
  DensityKind kind() const { return kind_; }
  const FieldLayout& layout() const { return layout_; }

 private:
  FieldLayout layout_;
  double alpha_;
  DensityKind kind_;
  std::vector<std::vector<std::uint64_t>> counts_;  // per field, per code
  std::uint64_t observed_ = 0;
};

// Returns the batch followed by its fakes. For each real sample j, (x_j, 1)
// is appended with probability g_j and, on an independent coin, (x_j, 0) is
// appended with probability g_j.
std::vector<Interaction> augment_with_fakes(std::span<const Interaction> batch,
                                            const GuidanceState& guidance, RngStream& rng);

// b i.i.d. uniform draws with replacement. Throws std::invalid_argument on an
// empty buffer or b == 0.
std::vector<Interaction> bootstrap_resample(std::span<const Interaction> buffer, std::size_t b,
                                            RngStream& rng);

// Uniformly shuffles the buffer and splits it into n disjoint batches; the
// first (size mod n) batches hold one extra element. Throws
// std::invalid_argument if n == 0 or the buffer holds fewer than n samples.
std::vector<std::vector<Interaction>> shuffle_split(std::span<const Interaction> buffer,
                                                    std::size_t n, RngStream& rng);

}  // namespace guideboot
