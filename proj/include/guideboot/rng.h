#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>

namespace guideboot {

// A labeled, single-owner random stream.
//
// Every stream is identified by its lineage: a root seed followed by the
// ordered labels used to derive it. Two streams with the same lineage emit
// identical sequences; streams with different labels are seeded from
// distinct hashed keys. Parallel consumers must each derive their own child
// instead of sharing a stream.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t root_seed);

  // Child stream keyed on (this lineage, label). Does not consume from or
  // depend on the position of this stream.
  RngStream derive(std::string_view label) const;

  result_type operator()();
  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // Uniform on [0, 1).
  double uniform();
  // Uniform over {0, ..., n - 1}; n must be positive.
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p);
  double normal();
  double gamma(double shape);
  double beta(double a, double b);
  std::uint32_t poisson(double mean);

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return position_; }
  const std::string& lineage() const { return lineage_; }

 private:
  RngStream(std::uint64_t key, std::string lineage);

  std::uint64_t key_;
  std::string lineage_;
  std::mt19937_64 engine_;
  std::uint64_t position_ = 0;
};

}  // namespace guideboot
