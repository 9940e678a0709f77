#include "guideboot/models.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "guideboot/envs.h"

namespace guideboot {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------- RewardModel

RewardModel::RewardModel(FieldLayout layout, std::size_t num_params)
    : layout_(std::move(layout)), params_(num_params, 0.0) {}

void RewardModel::logits(std::span<const FeatureVector> xs, std::span<double> out) const {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = logit(xs[i]);
}

double RewardModel::predict(const FeatureVector& x) const { return sigmoid(logit(x)); }

double RewardModel::logloss(std::span<const Interaction> batch) const {
  if (batch.empty()) throw std::invalid_argument("logloss of an empty batch");
  double total = 0.0;
  for (const auto& s : batch) {
    double p = std::clamp(predict(s.features), kLossClip, 1.0 - kLossClip);
    total -= s.reward ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(batch.size());
}

std::uint64_t RewardModel::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : params_) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

// ---------------------------------------------------------------- LogisticGlm

LogisticGlm::LogisticGlm(FieldLayout layout)
    : RewardModel(layout, 1 + layout.total_cardinality()) {
  std::size_t off = 1;
  for (Code card : layout_.cardinalities) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(card);
  }
}

std::unique_ptr<RewardModel> LogisticGlm::clone() const {
  return std::make_unique<LogisticGlm>(*this);
}

double& LogisticGlm::weight(std::size_t field, Code code) {
  return params_.at(offsets_.at(field) + static_cast<std::size_t>(code));
}

double LogisticGlm::weight(std::size_t field, Code code) const {
  return params_.at(offsets_.at(field) + static_cast<std::size_t>(code));
}

double LogisticGlm::logit(const FeatureVector& x) const {
  layout_.check(x);
  double z = params_[0];
  for (std::size_t j = 0; j < x.codes.size(); ++j) {
    z += params_[offsets_[j] + static_cast<std::size_t>(x.codes[j])];
  }
  return z;
}

Gradient LogisticGlm::grad_logloss(std::span<const Interaction> batch) const {
  if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
  Gradient g(params_.size(), 0.0);
  for (const auto& s : batch) {
    double residual = sigmoid(logit(s.features)) - s.reward;
    g[0] += residual;
    for (std::size_t j = 0; j < s.features.codes.size(); ++j) {
      g[offsets_[j] + static_cast<std::size_t>(s.features.codes[j])] += residual;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& v : g) v *= inv;
  return g;
}

// ------------------------------------------------------------------------ Mlp

namespace {

std::size_t mlp_param_count(const FieldLayout& layout, const MlpShape& shape) {
  const std::size_t in = shape.embedding_dim * layout.num_fields();
  return shape.embedding_dim * layout.total_cardinality() + shape.hidden * in + shape.hidden +
         shape.hidden * shape.hidden + shape.hidden + shape.hidden + 1;
}

std::vector<FeatureVector> features_of(std::span<const Interaction> batch) {
  std::vector<FeatureVector> xs;
  xs.reserve(batch.size());
  for (const auto& s : batch) xs.push_back(s.features);
  return xs;
}

void fill_uniform(std::span<double> block, double limit, RngStream& rng) {
  for (auto& v : block) v = -limit + 2.0 * limit * rng.uniform();
}

}  // namespace

struct Mlp::Forward {
  MatrixXd input;  // input_dim x B
  MatrixXd h1;     // hidden x B, post-ReLU
  MatrixXd h2;     // hidden x B, post-ReLU, pre-dropout
  MatrixXd scale;  // hidden x B dropout scale, empty when no dropout
  RowVectorXd z;
};

Mlp::Mlp(FieldLayout layout, MlpShape shape)
    : RewardModel(layout, mlp_param_count(layout, shape)), shape_(shape) {
  std::size_t off = 0;
  for (Code card : layout_.cardinalities) {
    offsets_.embeddings.push_back(off);
    off += shape_.embedding_dim * static_cast<std::size_t>(card);
  }
  const std::size_t h = shape_.hidden;
  offsets_.w1 = off;
  off += h * input_dim();
  offsets_.b1 = off;
  off += h;
  offsets_.w2 = off;
  off += h * h;
  offsets_.b2 = off;
  off += h;
  offsets_.w3 = off;
  off += h;
  offsets_.b3 = off;
}

Mlp Mlp::glorot(FieldLayout layout, RngStream& rng, MlpShape shape) {
  Mlp net(std::move(layout), shape);
  const auto& o = net.offsets_;
  const std::size_t d = shape.embedding_dim;
  const std::size_t h = shape.hidden;
  std::span<double> p = net.params_;
  for (std::size_t j = 0; j < net.layout_.num_fields(); ++j) {
    const auto card = static_cast<std::size_t>(net.layout_.cardinalities[j]);
    fill_uniform(p.subspan(o.embeddings[j], d * card),
                 std::sqrt(6.0 / static_cast<double>(card + d)), rng);
  }
  const std::size_t in = net.input_dim();
  fill_uniform(p.subspan(o.w1, h * in), std::sqrt(6.0 / static_cast<double>(in + h)), rng);
  fill_uniform(p.subspan(o.w2, h * h), std::sqrt(6.0 / static_cast<double>(2 * h)), rng);
  fill_uniform(p.subspan(o.w3, h), std::sqrt(6.0 / static_cast<double>(h + 1)), rng);
  return net;
}

std::unique_ptr<RewardModel> Mlp::clone() const { return std::make_unique<Mlp>(*this); }

Mlp::Forward Mlp::forward(std::span<const FeatureVector> xs, const double* unit_scale,
                          const std::vector<double>* sample_scale) const {
  const std::size_t batch = xs.size();
  const std::size_t d = shape_.embedding_dim;
  const auto h = static_cast<Eigen::Index>(shape_.hidden);
  const auto in = static_cast<Eigen::Index>(input_dim());
  const double* p = params_.data();

  Forward fw;
  fw.input.resize(in, static_cast<Eigen::Index>(batch));
  for (std::size_t i = 0; i < batch; ++i) {
    layout_.check(xs[i]);
    for (std::size_t j = 0; j < xs[i].codes.size(); ++j) {
      const double* e =
          p + offsets_.embeddings[j] + static_cast<std::size_t>(xs[i].codes[j]) * d;
      fw.input.block(static_cast<Eigen::Index>(j * d), static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(d), 1) =
          Map<const VectorXd>(e, static_cast<Eigen::Index>(d));
    }
  }
  Map<const MatrixXd> w1(p + offsets_.w1, h, in);
  Map<const VectorXd> b1(p + offsets_.b1, h);
  Map<const MatrixXd> w2(p + offsets_.w2, h, h);
  Map<const VectorXd> b2(p + offsets_.b2, h);
  Map<const VectorXd> w3(p + offsets_.w3, h);
  const double b3 = p[offsets_.b3];

  fw.h1 = ((w1 * fw.input).colwise() + b1).cwiseMax(0.0);
  fw.h2 = ((w2 * fw.h1).colwise() + b2).cwiseMax(0.0);
  if (unit_scale != nullptr) {
    fw.scale = Map<const VectorXd>(unit_scale, h).replicate(1, static_cast<Eigen::Index>(batch));
  } else if (sample_scale != nullptr) {
    fw.scale = Map<const MatrixXd>(sample_scale->data(), h, static_cast<Eigen::Index>(batch));
  }
  if (fw.scale.size() > 0) {
    fw.z = (w3.transpose() * fw.h2.cwiseProduct(fw.scale)).array() + b3;
  } else {
    fw.z = (w3.transpose() * fw.h2).array() + b3;
  }
  return fw;
}

Gradient Mlp::backward(std::span<const Interaction> batch, const Forward& fw) const {
  const std::size_t d = shape_.embedding_dim;
  const auto h = static_cast<Eigen::Index>(shape_.hidden);
  const auto in = static_cast<Eigen::Index>(input_dim());
  const auto n = static_cast<Eigen::Index>(batch.size());
  const double* p = params_.data();
  Map<const MatrixXd> w1(p + offsets_.w1, h, in);
  Map<const MatrixXd> w2(p + offsets_.w2, h, h);
  Map<const VectorXd> w3(p + offsets_.w3, h);

  Gradient g(params_.size(), 0.0);
  RowVectorXd dz(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dz[i] = (sigmoid(fw.z[i]) - batch[static_cast<std::size_t>(i)].reward) /
            static_cast<double>(n);
  }

  const bool dropout = fw.scale.size() > 0;
  MatrixXd h2d = dropout ? MatrixXd(fw.h2.cwiseProduct(fw.scale)) : fw.h2;
  Map<VectorXd>(g.data() + offsets_.w3, h) = h2d * dz.transpose();
  g[offsets_.b3] = dz.sum();

  MatrixXd dh2 = w3 * dz;
  if (dropout) dh2 = dh2.cwiseProduct(fw.scale);
  dh2 = dh2.cwiseProduct((fw.h2.array() > 0.0).cast<double>().matrix());
  Map<MatrixXd>(g.data() + offsets_.w2, h, h) = dh2 * fw.h1.transpose();
  Map<VectorXd>(g.data() + offsets_.b2, h) = dh2.rowwise().sum();

  MatrixXd dh1 = (w2.transpose() * dh2).cwiseProduct((fw.h1.array() > 0.0).cast<double>().matrix());
  Map<MatrixXd>(g.data() + offsets_.w1, h, in) = dh1 * fw.input.transpose();
  Map<VectorXd>(g.data() + offsets_.b1, h) = dh1.rowwise().sum();

  MatrixXd dinput = w1.transpose() * dh1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& codes = batch[static_cast<std::size_t>(i)].features.codes;
    for (std::size_t j = 0; j < codes.size(); ++j) {
      double* ge = g.data() + offsets_.embeddings[j] + static_cast<std::size_t>(codes[j]) * d;
      for (std::size_t k = 0; k < d; ++k) {
        ge[k] += dinput(static_cast<Eigen::Index>(j * d + k), i);
      }
    }
  }
  return g;
}

double Mlp::logit(const FeatureVector& x) const {
  return forward(std::span<const FeatureVector>(&x, 1), nullptr, nullptr).z[0];
}

void Mlp::logits(std::span<const FeatureVector> xs, std::span<double> out) const {
  if (xs.empty()) return;
  Forward fw = forward(xs, nullptr, nullptr);
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = fw.z[static_cast<Eigen::Index>(i)];
}

void Mlp::logits_masked(std::span<const FeatureVector> xs, std::span<const double> unit_scale,
                        std::span<double> out) const {
  if (unit_scale.size() != shape_.hidden) {
    throw std::invalid_argument("dropout mask must have one entry per hidden unit");
  }
  if (xs.empty()) return;
  Forward fw = forward(xs, unit_scale.data(), nullptr);
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = fw.z[static_cast<Eigen::Index>(i)];
}

std::vector<double> Mlp::draw_dropout_mask(double rate, RngStream& rng) const {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
  std::vector<double> mask(shape_.hidden);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

Gradient Mlp::grad_logloss(std::span<const Interaction> batch) const {
  if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
  std::vector<FeatureVector> xs = features_of(batch);
  return backward(batch, forward(xs, nullptr, nullptr));
}

Gradient Mlp::grad_logloss_dropout(std::span<const Interaction> batch, double rate,
                                   RngStream& rng) const {
  if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
  std::vector<FeatureVector> xs = features_of(batch);
  std::vector<double> scale(shape_.hidden * batch.size());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& s : scale) s = rng.uniform() < rate ? 0.0 : keep_scale;
  return backward(batch, forward(xs, nullptr, &scale));
}

// ---------------------------------------------------------------- free functions

std::unique_ptr<RewardModel> init_model(ModelKind kind, const FieldLayout& layout,
                                        RngStream& rng, MlpShape shape) {
  if (kind == ModelKind::kGlm) return std::make_unique<LogisticGlm>(layout);
  return std::make_unique<Mlp>(Mlp::glorot(layout, rng, shape));
}

AdamState AdamState::for_model(const RewardModel& model, AdamOptions options) {
  AdamState state;
  state.options = options;
  state.first_moment.assign(model.params().size(), 0.0);
  state.second_moment.assign(model.params().size(), 0.0);
  return state;
}

void adam_step(RewardModel& model, const Gradient& grad, AdamState& state) {
  std::span<double> params = model.params();
  if (grad.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: gradient/state shape does not match the model");
  }
  const AdamOptions& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = o.beta1 * m + (1.0 - o.beta1) * grad[i];
    v = o.beta2 * v + (1.0 - o.beta2) * grad[i] * grad[i];
    params[i] -= o.learning_rate * (m / c1) / (std::sqrt(v / c2) + o.epsilon);
  }
}

double mc_dropout_predict(const Mlp& model, const FeatureVector& x, double rate, RngStream& rng) {
  std::vector<double> mask = model.draw_dropout_mask(rate, rng);
  double z = 0.0;
  model.logits_masked(std::span<const FeatureVector>(&x, 1), mask, std::span<double>(&z, 1));
  return sigmoid(z);
}

// ------------------------------------------------------------------ checkpoint

void save_model(std::ostream& out, const RewardModel& model) {
  const FieldLayout& layout = model.layout();
  out << "guideboot-model 1\n";
  out << "kind " << (model.kind() == ModelKind::kGlm ? "glm" : "mlp") << '\n';
  out << "action_field " << layout.action_field << '\n';
  out << "cardinalities";
  for (Code c : layout.cardinalities) out << ' ' << c;
  out << '\n';
  if (model.kind() == ModelKind::kMlp) {
    const auto& shape = static_cast<const Mlp&>(model).shape();
    out << "mlp_shape " << shape.embedding_dim << ' ' << shape.hidden << '\n';
  }
  out << "params " << model.params().size() << '\n';
  char buf[40];
  for (double v : model.params()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
}

std::unique_ptr<RewardModel> load_model(std::istream& in) {
  auto fail = [](const std::string& what) -> std::runtime_error {
    return std::runtime_error("load_model: " + what);
  };
  std::string line, tag;
  int version = 0;
  if (!std::getline(in, line) || (std::istringstream(line) >> tag >> version, tag) !=
                                     "guideboot-model" || version != 1) {
    throw fail("missing or unsupported header");
  }
  std::string kind;
  FieldLayout layout;
  MlpShape shape;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    fields >> tag;
    if (tag == "kind") {
      fields >> kind;
    } else if (tag == "action_field") {
      fields >> layout.action_field;
    } else if (tag == "cardinalities") {
      Code c;
      while (fields >> c) layout.cardinalities.push_back(c);
    } else if (tag == "mlp_shape") {
      fields >> shape.embedding_dim >> shape.hidden;
    } else if (tag == "params") {
      fields >> count;
      break;
    } else {
      throw fail("unknown header line '" + line + "'");
    }
  }
  std::unique_ptr<RewardModel> model;
  if (kind == "glm") {
    model = std::make_unique<LogisticGlm>(layout);
  } else if (kind == "mlp") {
    model = std::make_unique<Mlp>(layout, shape);
  } else {
    throw fail("unknown model kind '" + kind + "'");
  }
  if (count != model->params().size()) throw fail("parameter count does not match layout");
  for (double& v : model->params()) {
    if (!(in >> v)) throw fail("truncated parameter list");
  }
  return model;
}

}  // namespace guideboot
