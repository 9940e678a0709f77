#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "guideboot/rng.h"
#include "guideboot/types.h"

namespace guideboot {

enum class ModelKind { kGlm, kMlp };

using Gradient = std::vector<double>;

// Predicted probabilities are clipped to [kLossClip, 1 - kLossClip] when the
// log-loss value is evaluated.
inline constexpr double kLossClip = 1e-7;

// A trainable reward model f(x) = sigmoid(logit(x)). All trainable values
// live in one flat parameter vector so the optimizer and checkpointing are
// model-agnostic.
class RewardModel {
 public:
  virtual ~RewardModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::unique_ptr<RewardModel> clone() const = 0;

  // Pre-sigmoid output. Throws std::out_of_range on codes outside the layout.
  virtual double logit(const FeatureVector& x) const = 0;
  virtual void logits(std::span<const FeatureVector> xs, std::span<double> out) const;
  double predict(const FeatureVector& x) const;

  // Mean gradient of the log-loss over the batch. Throws std::invalid_argument
  // on an empty batch.
  virtual Gradient grad_logloss(std::span<const Interaction> batch) const = 0;
  double logloss(std::span<const Interaction> batch) const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  const FieldLayout& layout() const { return layout_; }

  // FNV hash over the parameter bit patterns.
  std::uint64_t checksum() const;

 protected:
  RewardModel(FieldLayout layout, std::size_t num_params);

  FieldLayout layout_;
  std::vector<double> params_;
};

// sigmoid(bias + sum_j weight_j[code_j]); parameters are [bias, table_0, table_1, ...].
class LogisticGlm final : public RewardModel {
 public:
  explicit LogisticGlm(FieldLayout layout);

  ModelKind kind() const override { return ModelKind::kGlm; }
  std::unique_ptr<RewardModel> clone() const override;
  double logit(const FeatureVector& x) const override;
  Gradient grad_logloss(std::span<const Interaction> batch) const override;

  double bias() const { return params_[0]; }
  void set_bias(double b) { params_[0] = b; }
  double& weight(std::size_t field, Code code);
  double weight(std::size_t field, Code code) const;

 private:
  std::vector<std::size_t> offsets_;
};

struct MlpShape {
  std::size_t embedding_dim = 8;
  std::size_t hidden = 128;

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

// Per-field embeddings concatenated into two ReLU layers and a sigmoid output.
class Mlp final : public RewardModel {
 public:
  // Zero parameters.
  Mlp(FieldLayout layout, MlpShape shape = {});
  // Weight tables uniform on +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp glorot(FieldLayout layout, RngStream& rng, MlpShape shape = {});

  ModelKind kind() const override { return ModelKind::kMlp; }
  std::unique_ptr<RewardModel> clone() const override;
  double logit(const FeatureVector& x) const override;
  void logits(std::span<const FeatureVector> xs, std::span<double> out) const override;
  Gradient grad_logloss(std::span<const Interaction> batch) const override;

  // Training-time inverted dropout on the last hidden layer, with an
  // independent mask per sample.
  Gradient grad_logloss_dropout(std::span<const Interaction> batch, double rate,
                                RngStream& rng) const;

  // Logits with the last hidden layer scaled unit-wise by `unit_scale`
  // (one entry per hidden unit, shared by every input).
  void logits_masked(std::span<const FeatureVector> xs, std::span<const double> unit_scale,
                     std::span<double> out) const;

  // Inverted-dropout scale vector: 0 with probability rate, else 1/(1-rate).
  std::vector<double> draw_dropout_mask(double rate, RngStream& rng) const;

  const MlpShape& shape() const { return shape_; }
  std::size_t input_dim() const { return shape_.embedding_dim * layout_.num_fields(); }

  // Parameter block views, for tests and inspection.
  struct Offsets {
    std::vector<std::size_t> embeddings;  // per field, embedding_dim x cardinality
    std::size_t w1, b1, w2, b2, w3, b3;
  };
  const Offsets& offsets() const { return offsets_; }

 private:
  struct Forward;
  Forward forward(std::span<const FeatureVector> xs, const double* unit_scale,
                  const std::vector<double>* sample_scale) const;
  Gradient backward(std::span<const Interaction> batch, const Forward& fw) const;

  MlpShape shape_;
  Offsets offsets_;
};

std::unique_ptr<RewardModel> init_model(ModelKind kind, const FieldLayout& layout,
                                        RngStream& rng, MlpShape shape = {});

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamOptions options;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;

  static AdamState for_model(const RewardModel& model, AdamOptions options = {});
};

// Bias-corrected Adam update in place. Throws std::invalid_argument if the
// gradient or state does not match the parameter count.
void adam_step(RewardModel& model, const Gradient& grad, AdamState& state);

// One stochastic forward pass with dropout on the last hidden layer.
// Throws std::invalid_argument unless rate is in [0, 1).
double mc_dropout_predict(const Mlp& model, const FeatureVector& x, double rate,
                          RngStream& rng);

// Text checkpoint, format version 1:
//   guideboot-model 1
//   kind glm|mlp
//   action_field <index>
//   cardinalities <c_0> ... <c_J-1>
//   mlp_shape <embedding_dim> <hidden>      (mlp only)
//   params <count>
//   <one value per line, %.17g>
void save_model(std::ostream& out, const RewardModel& model);
std::unique_ptr<RewardModel> load_model(std::istream& in);

}  // namespace guideboot
