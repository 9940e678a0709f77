#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "guideboot/rng.h"
#include "guideboot/types.h"

namespace guideboot {

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Aggregated Bernoulli observations sharing one design row.
struct WeightedRow {
  Eigen::VectorXd x;
  double trials = 0.0;
  double successes = 0.0;
};

// Laplace approximation to a ridge-regularized Bayesian logistic regression:
// mean = MAP weights, covariance = inverse Hessian of the negative log
// posterior at the MAP.
class BayesGlmState {
 public:
  // Prior N(0, I / ridge): mean zero, precision ridge * I.
  BayesGlmState(Eigen::Index dim, double ridge);
  static BayesGlmState from_moments(Eigen::VectorXd mean, Eigen::MatrixXd precision);

  // Newton iterations from the current mean, then refreshes precision and
  // covariance at the result.
  void refit(std::span<const WeightedRow> rows, int newton_iterations = 25,
             double tolerance = 1e-10);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  // Throws StateError if the precision is not positive definite.
  const Eigen::MatrixXd& covariance() const;

  double linear_mean(const Eigen::VectorXd& x) const { return mean_.dot(x); }
  // sqrt(x' Sigma x).
  double width(const Eigen::VectorXd& x) const;

  // One draw from N(mean, Sigma). Throws StateError if Sigma is not positive
  // definite.
  Eigen::VectorXd sample(RngStream& rng) const;

  double ridge() const { return ridge_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  void refresh_factorization();

  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd covariance_factor_;  // lower L with L L' = Sigma
  bool positive_definite_ = false;
  double ridge_ = 1.0;
};

// Bias + concatenated one-hot fields.
Eigen::VectorXd one_hot(const FieldLayout& layout, const FeatureVector& x);
inline Eigen::Index one_hot_dim(const FieldLayout& layout) {
  return static_cast<Eigen::Index>(1 + layout.total_cardinality());
}

// UCB exploration coefficient sqrt(log(t + 1)).
double glm_ucb_coefficient(double t);

// argmax of mean(x) + sqrt(log(t+1)) * width(x) on the one-hot encoding.
std::size_t glm_ucb_select(const BayesGlmState& state, const FieldLayout& layout,
                           const CandidateSet& candidates, double t);

// Draws one weight vector and returns the argmax of its linear scores.
std::size_t ts_blr_sample_select(const BayesGlmState& state, const FieldLayout& layout,
                                 const CandidateSet& candidates, RngStream& rng);

}  // namespace guideboot
