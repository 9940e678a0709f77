#include "guideboot/bayes_glm.h"

#include <cmath>

#include "guideboot/envs.h"

namespace guideboot {

BayesGlmState::BayesGlmState(Eigen::Index dim, double ridge)
    : mean_(Eigen::VectorXd::Zero(dim)),
      precision_(Eigen::MatrixXd::Identity(dim, dim) * ridge),
      ridge_(ridge) {
  if (!(ridge > 0.0)) throw std::invalid_argument("ridge must be positive");
  refresh_factorization();
}

BayesGlmState BayesGlmState::from_moments(Eigen::VectorXd mean, Eigen::MatrixXd precision) {
  if (precision.rows() != mean.size() || precision.cols() != mean.size()) {
    throw std::invalid_argument("precision shape does not match mean");
  }
  BayesGlmState state(mean.size(), 1.0);
  state.mean_ = std::move(mean);
  state.precision_ = std::move(precision);
  state.refresh_factorization();
  return state;
}

void BayesGlmState::refresh_factorization() {
  Eigen::LLT<Eigen::MatrixXd> llt(precision_);
  positive_definite_ = llt.info() == Eigen::Success && precision_.isApprox(precision_.transpose());
  if (!positive_definite_) return;
  covariance_ = llt.solve(Eigen::MatrixXd::Identity(dim(), dim()));
  covariance_ = 0.5 * (covariance_ + covariance_.transpose());
  Eigen::LLT<Eigen::MatrixXd> cov_llt(covariance_);
  positive_definite_ = cov_llt.info() == Eigen::Success;
  if (positive_definite_) covariance_factor_ = cov_llt.matrixL();
}

void BayesGlmState::refit(std::span<const WeightedRow> rows, int newton_iterations,
                          double tolerance) {
  const Eigen::Index d = dim();
  Eigen::VectorXd w = mean_;
  Eigen::MatrixXd hessian(d, d);
  for (int iter = 0; iter < newton_iterations; ++iter) {
    Eigen::VectorXd grad = ridge_ * w;
    hessian = Eigen::MatrixXd::Identity(d, d) * ridge_;
    for (const auto& row : rows) {
      const double p = sigmoid(row.x.dot(w));
      grad += (row.trials * p - row.successes) * row.x;
      hessian.selfadjointView<Eigen::Lower>().rankUpdate(row.x, row.trials * p * (1.0 - p));
    }
    hessian.triangularView<Eigen::StrictlyUpper>() = hessian.transpose();
    Eigen::VectorXd step = hessian.llt().solve(grad);
    w -= step;
    if (step.lpNorm<Eigen::Infinity>() < tolerance) break;
  }
  mean_ = w;
  precision_ = Eigen::MatrixXd::Identity(d, d) * ridge_;
  for (const auto& row : rows) {
    const double p = sigmoid(row.x.dot(w));
    precision_.selfadjointView<Eigen::Lower>().rankUpdate(row.x, row.trials * p * (1.0 - p));
  }
  precision_.triangularView<Eigen::StrictlyUpper>() = precision_.transpose();
  refresh_factorization();
}

const Eigen::MatrixXd& BayesGlmState::covariance() const {
  if (!positive_definite_) throw StateError("posterior precision is not positive definite");
  return covariance_;
}

double BayesGlmState::width(const Eigen::VectorXd& x) const {
  return std::sqrt(std::max(0.0, x.dot(covariance() * x)));
}

Eigen::VectorXd BayesGlmState::sample(RngStream& rng) const {
  if (!positive_definite_) throw StateError("posterior covariance is not positive definite");
  Eigen::VectorXd z(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) z[i] = rng.normal();
  return mean_ + covariance_factor_ * z;
}

Eigen::VectorXd one_hot(const FieldLayout& layout, const FeatureVector& x) {
  layout.check(x);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(one_hot_dim(layout));
  v[0] = 1.0;
  Eigen::Index off = 1;
  for (std::size_t j = 0; j < x.codes.size(); ++j) {
    v[off + x.codes[j]] = 1.0;
    off += layout.cardinalities[j];
  }
  return v;
}

double glm_ucb_coefficient(double t) { return std::sqrt(std::log(t + 1.0)); }

std::size_t glm_ucb_select(const BayesGlmState& state, const FieldLayout& layout,
                           const CandidateSet& candidates, double t) {
  const double coef = glm_ucb_coefficient(t);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& x : candidates.candidates) {
    Eigen::VectorXd v = one_hot(layout, x);
    scores.push_back(state.linear_mean(v) + coef * state.width(v));
  }
  return argmax_tiebreak(scores);
}

std::size_t ts_blr_sample_select(const BayesGlmState& state, const FieldLayout& layout,
                                 const CandidateSet& candidates, RngStream& rng) {
  Eigen::VectorXd w = state.sample(rng);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& x : candidates.candidates) scores.push_back(one_hot(layout, x).dot(w));
  return argmax_tiebreak(scores);
}

}  // namespace guideboot
