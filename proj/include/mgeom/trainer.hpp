#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgeom/error.hpp"
#include "mgeom/manifold.hpp"
#include "mgeom/matrix.hpp"

namespace mgeom {

enum class Activation { Tanh, Relu, Identity };

struct DenseLayer {
  Matrix weight;              // out x in
  std::vector<double> bias;   // out
  Activation activation = Activation::Identity;
};

/// Feature sub-network (all layers but the last) followed by a linear
/// classifier. The output of the last hidden layer is the feature z.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {input, hidden..., classes}; at least one hidden layer.
  /// Weights and biases are drawn uniformly from +-1/sqrt(fan_in).
  Mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation feature,
      std::uint64_t seed);
  explicit Mlp(std::vector<DenseLayer> layers);

  std::size_t input_dim() const { return layers_.front().weight.cols(); }
  std::size_t feature_dim() const { return layers_[layers_.size() - 2].weight.rows(); }
  std::size_t class_count() const { return layers_.back().weight.rows(); }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

struct ForwardPass {
  std::vector<Matrix> activations;  // [0] = inputs, then one per layer
  Matrix features;                  // p x b
  Matrix logits;                    // C x b
  Matrix probabilities;             // C x b, columns sum to 1
};

ForwardPass forward(const Mlp& mlp, const Matrix& inputs);

/// Mean softmax cross-entropy over the batch.
double cross_entropy(const ForwardPass& pass, const std::vector<ClassId>& labels);

struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
};

/// Gradient of the mean cross-entropy. `extra_feature_grad` (p x b) is
/// added to dL/dz before propagating through the feature sub-network.
MlpGradients backward_ce(const Mlp& mlp, const Matrix& inputs, const std::vector<ClassId>& labels,
                         const Matrix* extra_feature_grad = nullptr);

void sgd_step(Mlp& mlp, const MlpGradients& grads, double learning_rate);

enum class TrainMode { Ce, CeCr };

struct BlobDataset {
  std::vector<std::size_t> counts{200, 200, 200};
  std::size_t input_dim = 8;
  // Class means; when empty they are spaced evenly on a circle of radius
  // `spread` in the first two input coordinates.
  std::vector<std::vector<double>> means;
  double spread = 2.0;
  double sigma = 2.25;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
};

struct TrainConfig {
  TrainMode mode = TrainMode::Ce;
  std::size_t epochs = 60;
  std::size_t batch_size = 128;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{16, 3};
  Activation hidden_activation = Activation::Tanh;
  Activation feature_activation = Activation::Identity;
  std::size_t k = 15;
  double tau = 100.0;
  std::size_t warmup_epochs = 5;
  std::size_t curvature_every = 1;
  double fd_step = 1e-4;
  double holdout_fraction = 0.2;
  std::size_t early_epoch = 10;
  BlobDataset data;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::vector<double> accuracy;     // held-out, per class
  std::vector<double> separation;   // per class, NaN if undefined
  std::vector<double> complexity;   // per class, NaN if undefined
  double pcc_accuracy_separation = 0.0;  // NaN if undefined
  double pcc_accuracy_complexity = 0.0;  // NaN if undefined
  double accuracy_variance = 0.0;
  double bias_ratio = 0.0;
  std::size_t cr_steps = 0;  // iterations that applied the combined loss
};

struct TrainingTrace {
  std::size_t class_count = 0;
  std::vector<EpochRecord> epochs;
};

/// Thrown when the loss becomes non-finite; carries the records so far.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, TrainingTrace trace)
      : Error(ErrorCode::TrainingDiverged, what), trace_(std::move(trace)) {}
  const TrainingTrace& trace() const noexcept { return trace_; }

 private:
  TrainingTrace trace_;
};

/// Synthetic train / held-out data for a config (stratified split from the
/// dataset seed).
struct DataSplit {
  LabeledCloud train;
  LabeledCloud holdout;
};
DataSplit make_split(const TrainConfig& config);

TrainingTrace train(const TrainConfig& config);

/// Trend statistics derived from a finished trace.
struct TraceSummary {
  double spearman_separation = 0.0;  // Spearman(epoch, mean separation)
  double spearman_complexity = 0.0;  // Spearman(epoch, mean complexity)
  double final_curvature_variance = 0.0;
  double final_accuracy_variance = 0.0;
  double final_mean_accuracy = 0.0;
  std::optional<double> early_pcc_separation, late_pcc_separation;
  std::optional<double> early_pcc_complexity, late_pcc_complexity;
  bool separation_rising = false;    // spearman_separation >= 0.8
  bool complexity_falling = false;   // spearman_complexity <= -0.5
  bool pcc_crossing = false;
};
TraceSummary summarize(const TrainingTrace& trace, std::size_t early_epoch);

}  // namespace mgeom
