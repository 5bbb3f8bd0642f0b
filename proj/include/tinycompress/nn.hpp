#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tinycompress/linalg.hpp"
#include "tinycompress/rng.hpp"

namespace tc::nn {

/// Layer widths from input to output.
struct Architecture {
  std::vector<std::size_t> layer_sizes;

  /// 52-64-256-128-256-128-64-2: six hidden layers between the 52 process
  /// measurements and the fault / no-fault outputs.
  static Architecture fault_detector();

  std::size_t inputs() const { return layer_sizes.front(); }
  std::size_t classes() const { return layer_sizes.back(); }
  std::size_t affine_count() const { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
  std::size_t weight_count() const;
  std::size_t parameter_count() const;

  /// Throws ArgumentError unless there are at least two nonzero widths.
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct DenseLayer {
  Matrix weights;  // fan_out × fan_in
  Vector bias;     // fan_out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct DenseModel {
  Architecture arch;
  std::vector<DenseLayer> layers;

  static DenseModel zeros(const Architecture& arch);
  /// He-uniform weights, bound sqrt(6 / fan_in); zero biases.
  static DenseModel he_uniform(const Architecture& arch, Rng& rng);

  std::size_t parameter_count() const;

  /// Throws ShapeError if a layer disagrees with `arch`.
  void validate() const;

  friend bool operator==(const DenseModel&, const DenseModel&) = default;
};

/// Gradients of the loss, laid out like the model's layers.
struct Gradients {
  std::vector<DenseLayer> layers;
  double loss = 0.0;
};

/// Samples as rows of `inputs` with integer class labels.
struct LabeledSet {
  Matrix inputs;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  LabeledSet subset(std::span<const std::size_t> indices) const;
};

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  DenseModel model;
  std::vector<double> loss_history;  // mean minibatch loss per epoch
};

// Activation placement for a model with L affine maps: ReLU after maps
// 1..L-2, nothing after map L-1 (the last hidden layer), softmax after map L.

/// Class probabilities for one sample.
Vector forward(const DenseModel& model, std::span<const float> x);

/// Class probabilities for every row of `inputs`.
Matrix forward_batch(const DenseModel& model, const Matrix& inputs);

/// Mean negative log-likelihood plus l2_penalty · Σ‖W‖² / 2 (weights only).
double loss(const DenseModel& model, const LabeledSet& batch, double l2_penalty);

Gradients backward(const DenseModel& model, const LabeledSet& batch, double l2_penalty);

TrainResult train(DenseModel model, const LabeledSet& data, const TrainConfig& cfg);

/// Percentage of samples whose argmax class equals the label.
double accuracy(const DenseModel& model, const LabeledSet& data);

/// Percentage of rows of `probabilities` whose argmax equals the label.
double accuracy_from_probabilities(const Matrix& probabilities, std::span<const int> labels);

}  // namespace tc::nn
