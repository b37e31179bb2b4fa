#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ctms/dataset.hpp"
#include "ctms/design_space.hpp"
#include "ctms/model.hpp"
#include "ctms/rng.hpp"

namespace ctms {

/// Per-dimension min-max scaling onto [0, 1]. A dimension whose range is
/// empty (max == min) is degenerate: it always maps to 0 and back to min.
struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  static MinMaxScaler fit(const std::vector<std::vector<double>>& rows);
  std::size_t size() const { return min.size(); }
  bool degenerate(std::size_t dim) const { return !(max[dim] > min[dim]); }
  std::vector<std::size_t> degenerate_dims() const;
  std::vector<double> transform(std::span<const double> x) const;
  std::vector<double> inverse(std::span<const double> z) const;

  bool operator==(const MinMaxScaler&) const = default;
};

/// (L, v̄, w, q^max, ρ^max, β) per cell, then (p^ms, r^{s,max}, L_(i,j)): 6N + 3 values.
std::vector<double> raw_features(const StretchParams& stretch, const FixedParams& fixed);
/// (i, j, δ [min], βˢ).
std::vector<double> raw_targets(const StationDesign& design);

/// Single-hidden-layer perceptron: x → ReLU(W₁x + b₁) → dropout → W₂h + b₂.
/// Weights are row-major: w1 is hidden × input, w2 is output × hidden.
struct MLPModel {
  int cells = 0;
  int input_dim = 0;
  int hidden_dim = 55;
  int output_dim = 4;
  double dropout_rate = 0.2;
  std::vector<double> w1, b1, w2, b2;
  MinMaxScaler feature_scaler;
  MinMaxScaler target_scaler;

  /// Throws DomainError on inconsistent dimensions or non-finite weights.
  void validate() const;

  bool operator==(const MLPModel&) const = default;
};

/// Fresh model for stretches of `cells` cells: He-uniform W₁, Glorot-uniform
/// W₂, zero biases, identity scalers (min 0, max 1).
MLPModel init_model(int cells, int hidden_dim, double dropout_rate, std::uint64_t seed);

/// Scaled feature vector; throws DomainError when the stretch does not have
/// the model's cell count.
std::vector<double> featurize(const MLPModel& model, const StretchParams& stretch, const FixedParams& fixed);
std::vector<double> featurize(const StretchParams& stretch, const FixedParams& fixed, const MinMaxScaler& scaler);

/// Output in normalized target space. With training = true an inverted
/// dropout mask is drawn from `rng`; with training = false rng is unused.
std::vector<double> forward(const MLPModel& model, std::span<const double> features, bool training, Rng* rng = nullptr);

/// Mean over dimensions of (ln(1+p) − ln(1+t))²; DomainError if any value <= −1.
double msle_loss(std::span<const double> predicted, std::span<const double> target);

/// Parameter-shaped gradient buffers.
struct Gradients {
  std::vector<double> w1, b1, w2, b2;
};

struct Sample {
  std::vector<double> features;  ///< scaled
  std::vector<double> target;    ///< scaled
};

/// Mean MSLE over `batch` and its gradient with respect to every weight.
/// With clip_negative, predictions are clipped at 0 before the log (the
/// gradient through a clipped output is zero), which keeps the loss defined
/// while the network is still emitting negative values early in training.
/// Dropout is applied iff rng != nullptr.
double loss_and_gradients(const MLPModel& model, std::span<const Sample> batch, Gradients& grads, bool clip_negative,
                          Rng* rng = nullptr);

struct TrainConfig {
  int batch_size = 64;
  int epochs = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int decay_every = 40;       ///< epochs between learning-rate halvings
  double decay_factor = 0.5;
  double validation_fraction = 0.2;
  int hidden_dim = 55;
  double dropout_rate = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  MLPModel model;
  std::vector<double> train_loss;       ///< per epoch, mean of batch losses with dropout
  std::vector<double> validation_loss;  ///< per epoch, inference mode on the held-out split
  std::vector<double> learning_rate;    ///< per epoch
  std::vector<std::string> warnings;    ///< e.g. degenerate scaler dimensions
  std::vector<std::size_t> validation_indices;  ///< corpus indices of the held-out split
};

/// Shuffles the corpus with the seed, holds out `validation_fraction`, fits
/// the scalers on the training split and runs mini-batch Adam on MSLE.
TrainResult train(const std::vector<DesignRecord>& corpus, const TrainConfig& config);

/// Inference, de-normalization, then projection onto the feasible set.
StationDesign predict(const MLPModel& model, const StretchParams& stretch, const FixedParams& fixed,
                      const DesignBounds& bounds);

void save_model(const MLPModel& model, const std::filesystem::path& path);
MLPModel load_model(const std::filesystem::path& path);
std::string model_to_json(const MLPModel& model);
MLPModel model_from_json(const std::string& text);

/// epoch,train_loss,validation_loss,learning_rate
void write_loss_csv(std::ostream& out, const TrainResult& result);

}  // namespace ctms
