#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace guideboot {

using Code = std::int32_t;
using Codes = boost::container::small_vector<Code, 8>;

// Ordered categorical field codes for one (context, action) pair.
struct FeatureVector {
  Codes codes;
  std::size_t action_field = 0;

  Code action() const { return codes[action_field]; }
  std::size_t num_fields() const { return codes.size(); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Field count, per-field cardinalities, and which field identifies the action.
struct FieldLayout {
  std::vector<Code> cardinalities;
  std::size_t action_field = 0;

  std::size_t num_fields() const { return cardinalities.size(); }
  Code action_cardinality() const { return cardinalities.at(action_field); }
  std::size_t total_cardinality() const;

  // Throws std::out_of_range if x does not fit this layout.
  void check(const FeatureVector& x) const;

  friend bool operator==(const FieldLayout&, const FieldLayout&) = default;
};

struct Interaction {
  FeatureVector features;
  int reward = 0;
  std::size_t step = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct CandidateSet {
  std::vector<FeatureVector> candidates;

  std::size_t size() const { return candidates.size(); }
  const FeatureVector& operator[](std::size_t i) const { return candidates[i]; }

  // m >= 1 and a shared field layout.
  void check() const;
};

Interaction make_interaction(FeatureVector features, int reward, std::size_t step = 0);

// Index of the largest score; ties go to the lowest index.
// Throws std::invalid_argument on an empty list or a non-finite score.
std::size_t argmax_tiebreak(std::span<const double> scores);

}  // namespace guideboot
