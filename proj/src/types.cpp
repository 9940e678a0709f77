#include "guideboot/types.h"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace guideboot {

std::size_t FieldLayout::total_cardinality() const {
  return std::accumulate(cardinalities.begin(), cardinalities.end(), std::size_t{0});
}

void FieldLayout::check(const FeatureVector& x) const {
  if (x.codes.size() != cardinalities.size()) {
    throw std::out_of_range("feature vector has " + std::to_string(x.codes.size()) +
                            " fields, layout declares " +
                            std::to_string(cardinalities.size()));
  }
  for (std::size_t j = 0; j < cardinalities.size(); ++j) {
    if (x.codes[j] < 0 || x.codes[j] >= cardinalities[j]) {
      throw std::out_of_range("code " + std::to_string(x.codes[j]) + " outside field " +
                              std::to_string(j) + " cardinality " +
                              std::to_string(cardinalities[j]));
    }
  }
}

void CandidateSet::check() const {
  if (candidates.empty()) throw std::invalid_argument("candidate set is empty");
  const std::size_t fields = candidates.front().num_fields();
  for (const auto& c : candidates) {
    if (c.num_fields() != fields) {
      throw std::invalid_argument("candidates do not share a field layout");
    }
  }
}

Interaction make_interaction(FeatureVector features, int reward, std::size_t step) {
  if (reward != 0 && reward != 1) {
    throw std::invalid_argument("reward must be 0 or 1");
  }
  return Interaction{std::move(features), reward, step};
}

std::size_t argmax_tiebreak(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax of an empty list");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw std::invalid_argument("non-finite score at index " + std::to_string(i));
    }
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace guideboot
