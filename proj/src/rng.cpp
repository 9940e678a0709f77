#include "guideboot/rng.h"

#include <stdexcept>

namespace guideboot {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::mt19937_64 make_engine(std::uint64_t key) {
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed)
    : RngStream(splitmix64(root_seed), std::to_string(root_seed)) {}

RngStream::RngStream(std::uint64_t key, std::string lineage)
    : key_(key), lineage_(std::move(lineage)), engine_(make_engine(key)) {}

RngStream RngStream::derive(std::string_view label) const {
  if (label.empty()) {
    throw std::invalid_argument("derive: label must be nonempty");
  }
  std::uint64_t child = splitmix64(key_ ^ splitmix64(fnv1a(label)));
  std::string lineage = lineage_;
  lineage += '/';
  lineage += label;
  return RngStream(child, std::move(lineage));
}

RngStream::result_type RngStream::operator()() {
  ++position_;
  return engine_();
}

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(*this);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

double RngStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(*this); }

double RngStream::gamma(double shape) {
  return std::gamma_distribution<double>(shape, 1.0)(*this);
}

double RngStream::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  return x / (x + y);
}

std::uint32_t RngStream::poisson(double mean) {
  return std::poisson_distribution<std::uint32_t>(mean)(*this);
}

}  // namespace guideboot
